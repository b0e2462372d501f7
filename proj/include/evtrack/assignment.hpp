#pragma once

#include <cstddef>
#include <utility>
#include <vector>

namespace evtrack {

// Dense rows x cols cost matrix, row-major.
struct CostTable {
    std::size_t rows{0};
    std::size_t cols{0};
    std::vector<double> cost;

    CostTable() = default;
    CostTable(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), cost(r * c, fill) {}
    double& at(std::size_t r, std::size_t c) { return cost[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return cost[r * cols + c]; }
};

// Minimum-cost assignment (Hungarian / shortest augmenting path). Returns min(rows, cols)
// (row, col) pairs sorted by row.
std::vector<std::pair<std::size_t, std::size_t>> solve_assignment(const CostTable& table);

}  // namespace evtrack
