#pragma once

#include <evtrack/common.hpp>
#include <evtrack/stream_io.hpp>

#include <array>
#include <map>
#include <string>
#include <vector>

namespace evtrack {

double iou(const BBox& a, const BBox& b);

// IoU thresholds 0.05, 0.10, ..., 0.95.
std::array<double, 19> alpha_grid();

struct MatchedPair {
    int gt_id{0};
    int pred_id{0};
    double similarity{0.0};
};

struct WindowMatch {
    std::vector<MatchedPair> matches;
    std::vector<int> fn_ids;  // unmatched ground truth
    std::vector<int> fp_ids;  // unmatched predictions
};

// Per window, the maximum-total-IoU matching among pairs with IoU >= alpha. Keys cover every
// window present in either input.
std::map<int, WindowMatch> match_at_alpha(const std::vector<MotRecord>& gt, const std::vector<MotRecord>& pred,
                                          double alpha);

struct AlphaScores {
    double alpha{0.0};
    double det_a{0.0};
    double ass_a{0.0};
    double loc_a{0.0};
    double hota{0.0};
    long tp{0};
    long fn{0};
    long fp{0};
};

struct HotaReport {
    std::vector<AlphaScores> per_alpha;
    double hota{0.0};
    double det_a{0.0};
    double ass_a{0.0};
    double loc_a{0.0};
    // Values at the smallest grid threshold.
    double hota_0{0.0};
    double loc_a_0{0.0};
    double hota_loc_a_0{0.0};
};

// HOTA family over the alpha grid. Window numbers of gt and pred must refer to the same schedule.
HotaReport compute_hota(const std::vector<MotRecord>& gt, const std::vector<MotRecord>& pred);

// Aligned text table, percentages with one decimal.
std::string format_report_table(const HotaReport& report);
// alpha,DetA,AssA,LocA,HOTA rows followed by aggregate rows.
std::string format_report_csv(const HotaReport& report);

}  // namespace evtrack
