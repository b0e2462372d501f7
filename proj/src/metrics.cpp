#include <evtrack/assignment.hpp>
#include <evtrack/metrics.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <utility>

namespace evtrack {

double iou(const BBox& a, const BBox& b) {
    const double iw = std::min(a.right(), b.right()) - std::max(a.left, b.left);
    const double ih = std::min(a.bottom(), b.bottom()) - std::max(a.top, b.top);
    const double inter = (iw > 0.0 && ih > 0.0) ? iw * ih : 0.0;
    const double uni = a.area() + b.area() - inter;
    return uni > 0.0 ? inter / uni : 0.0;
}

std::array<double, 19> alpha_grid() {
    std::array<double, 19> g{};
    for (int i = 0; i < 19; ++i) g[i] = (i + 1) * 0.05;
    return g;
}

namespace {

using WindowIndex = std::map<int, std::pair<std::vector<const MotRecord*>, std::vector<const MotRecord*>>>;

WindowIndex index_windows(const std::vector<MotRecord>& gt, const std::vector<MotRecord>& pred) {
    WindowIndex idx;
    for (const auto& r : gt) idx[r.frame].first.push_back(&r);
    for (const auto& r : pred) idx[r.frame].second.push_back(&r);
    return idx;
}

WindowMatch match_window(const std::vector<const MotRecord*>& g, const std::vector<const MotRecord*>& p,
                         double alpha) {
    // floating slack on the threshold so that e.g. IoU 0.15 passes alpha = 3 * 0.05
    const double gate = alpha - std::numeric_limits<double>::epsilon();
    WindowMatch wm;
    CostTable table(g.size(), p.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        for (std::size_t j = 0; j < p.size(); ++j) {
            const double s = iou(g[i]->bbox, p[j]->bbox);
            table.at(i, j) = s >= gate ? -s : 0.0;
        }
    }
    std::vector<char> gu(g.size(), 0), pu(p.size(), 0);
    for (auto [i, j] : solve_assignment(table)) {
        if (table.at(i, j) >= 0.0) continue;  // infeasible pair
        wm.matches.push_back({g[i]->id, p[j]->id, -table.at(i, j)});
        gu[i] = pu[j] = 1;
    }
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (!gu[i]) wm.fn_ids.push_back(g[i]->id);
    }
    for (std::size_t j = 0; j < p.size(); ++j) {
        if (!pu[j]) wm.fp_ids.push_back(p[j]->id);
    }
    return wm;
}

}  // namespace

std::map<int, WindowMatch> match_at_alpha(const std::vector<MotRecord>& gt, const std::vector<MotRecord>& pred,
                                          double alpha) {
    std::map<int, WindowMatch> out;
    for (const auto& [window, lists] : index_windows(gt, pred)) {
        out[window] = match_window(lists.first, lists.second, alpha);
    }
    return out;
}

HotaReport compute_hota(const std::vector<MotRecord>& gt, const std::vector<MotRecord>& pred) {
    HotaReport report;
    const auto grid = alpha_grid();

    if (gt.empty() && pred.empty()) {
        for (double a : grid) report.per_alpha.push_back({a, 1.0, 1.0, 1.0, 1.0, 0, 0, 0});
        report.hota = report.det_a = report.ass_a = report.loc_a = 1.0;
        report.hota_0 = report.loc_a_0 = report.hota_loc_a_0 = 1.0;
        return report;
    }

    std::map<int, long> gt_count, pred_count;
    for (const auto& r : gt) ++gt_count[r.id];
    for (const auto& r : pred) ++pred_count[r.id];
    const auto windows = index_windows(gt, pred);

    for (double alpha : grid) {
        AlphaScores s;
        s.alpha = alpha;
        std::map<std::pair<int, int>, long> pair_count;
        std::vector<std::pair<int, int>> tp_pairs;
        double sim_sum = 0.0;
        for (const auto& [window, lists] : windows) {
            const auto wm = match_window(lists.first, lists.second, alpha);
            s.tp += static_cast<long>(wm.matches.size());
            s.fn += static_cast<long>(wm.fn_ids.size());
            s.fp += static_cast<long>(wm.fp_ids.size());
            for (const auto& m : wm.matches) {
                ++pair_count[{m.gt_id, m.pred_id}];
                tp_pairs.emplace_back(m.gt_id, m.pred_id);
                sim_sum += m.similarity;
            }
        }
        if (s.tp > 0) {
            double ass_sum = 0.0;
            for (const auto& c : tp_pairs) {
                const double tpa = static_cast<double>(pair_count[c]);
                const double fna = static_cast<double>(gt_count[c.first]) - tpa;
                const double fpa = static_cast<double>(pred_count[c.second]) - tpa;
                ass_sum += tpa / (tpa + fna + fpa);
            }
            const double denom = static_cast<double>(s.tp + s.fn + s.fp);
            s.det_a = static_cast<double>(s.tp) / denom;
            s.ass_a = ass_sum / static_cast<double>(s.tp);
            s.hota = std::sqrt(ass_sum / denom);
            s.loc_a = sim_sum / static_cast<double>(s.tp);
        }
        report.per_alpha.push_back(s);
    }

    const double n = static_cast<double>(report.per_alpha.size());
    for (const auto& s : report.per_alpha) {
        report.hota += s.hota;
        report.det_a += s.det_a;
        report.ass_a += s.ass_a;
        report.loc_a += s.loc_a;
    }
    report.hota /= n;
    report.det_a /= n;
    report.ass_a /= n;
    report.loc_a /= n;
    report.hota_0 = report.per_alpha.front().hota;
    report.loc_a_0 = report.per_alpha.front().loc_a;
    report.hota_loc_a_0 = report.hota_0 * report.loc_a_0;
    return report;
}

std::string format_report_table(const HotaReport& r) {
    std::string out;
    char buf[160];
    std::snprintf(buf, sizeof buf, "%-8s %7s %7s %7s %7s\n", "alpha", "HOTA", "DetA", "AssA", "LocA");
    out += buf;
    for (const auto& s : r.per_alpha) {
        std::snprintf(buf, sizeof buf, "%-8.2f %7.1f %7.1f %7.1f %7.1f\n", s.alpha, 100 * s.hota, 100 * s.det_a,
                      100 * s.ass_a, 100 * s.loc_a);
        out += buf;
    }
    std::snprintf(buf, sizeof buf, "%-8s %7.1f %7.1f %7.1f %7.1f\n", "mean", 100 * r.hota, 100 * r.det_a,
                  100 * r.ass_a, 100 * r.loc_a);
    out += buf;
    std::snprintf(buf, sizeof buf, "HOTA(0) %.1f  LocA(0) %.1f  HOTA-LocA(0) %.1f\n", 100 * r.hota_0,
                  100 * r.loc_a_0, 100 * r.hota_loc_a_0);
    out += buf;
    return out;
}

std::string format_report_csv(const HotaReport& r) {
    std::string out = "alpha,DetA,AssA,LocA,HOTA\n";
    char buf[160];
    for (const auto& s : r.per_alpha) {
        std::snprintf(buf, sizeof buf, "%.2f,%.1f,%.1f,%.1f,%.1f\n", s.alpha, 100 * s.det_a, 100 * s.ass_a,
                      100 * s.loc_a, 100 * s.hota);
        out += buf;
    }
    std::snprintf(buf, sizeof buf, "mean,%.1f,%.1f,%.1f,%.1f\n", 100 * r.det_a, 100 * r.ass_a, 100 * r.loc_a,
                  100 * r.hota);
    out += buf;
    std::snprintf(buf, sizeof buf, "zero,,,%.1f,%.1f\n", 100 * r.loc_a_0, 100 * r.hota_0);
    out += buf;
    std::snprintf(buf, sizeof buf, "hota_loca_zero,,,,%.1f\n", 100 * r.hota_loc_a_0);
    out += buf;
    return out;
}

}  // namespace evtrack
