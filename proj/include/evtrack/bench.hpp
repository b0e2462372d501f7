#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace evtrack {

struct BenchConfig {
    int mask_width{80};
    int mask_height{45};
    int margin_px{16};
    double bbox_enlargement{0.10};
    int repetitions{200};
    int warmup{20};
    std::uint64_t seed{7};
};

struct BenchStage {
    std::string name;
    double mean_ms{0.0};
    double median_ms{0.0};
    double envelope_ms{0.0};  // reference latency to stay under; 0 when none
};

// Times mask generation, inter-frame detection and refinement on one synthetic object.
// Warm-up runs are excluded from the statistics.
std::vector<BenchStage> run_bench(const BenchConfig& config);

std::string format_bench_table(const std::vector<BenchStage>& stages);

}  // namespace evtrack
