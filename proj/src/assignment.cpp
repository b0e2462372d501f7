#include <evtrack/assignment.hpp>

#include <algorithm>
#include <limits>

namespace evtrack {

std::vector<std::pair<std::size_t, std::size_t>> solve_assignment(const CostTable& table) {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    if (table.rows == 0 || table.cols == 0) return out;

    // Potentials formulation needs rows <= cols; transpose otherwise.
    const bool transposed = table.rows > table.cols;
    const std::size_t n = transposed ? table.cols : table.rows;
    const std::size_t m = transposed ? table.rows : table.cols;
    auto cost = [&](std::size_t i, std::size_t j) { return transposed ? table.at(j, i) : table.at(i, j); };

    constexpr double kInf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
    std::vector<std::size_t> p(m + 1, 0), way(m + 1, 0);
    for (std::size_t i = 1; i <= n; ++i) {
        p[0] = i;
        std::size_t j0 = 0;
        std::vector<double> minv(m + 1, kInf);
        std::vector<char> used(m + 1, 0);
        do {
            used[j0] = 1;
            const std::size_t i0 = p[j0];
            double delta = kInf;
            std::size_t j1 = 0;
            for (std::size_t j = 1; j <= m; ++j) {
                if (used[j]) continue;
                const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= m; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const std::size_t j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }

    for (std::size_t j = 1; j <= m; ++j) {
        if (p[j] == 0) continue;
        if (transposed) {
            out.emplace_back(j - 1, p[j] - 1);
        } else {
            out.emplace_back(p[j] - 1, j - 1);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace evtrack
