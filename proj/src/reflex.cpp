#include "rapd/reflex.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>

#include "rapd/errors.hpp"

namespace rapd::reflex {

namespace {

std::vector<double> truncated(const std::vector<double>& x, std::size_t n) {
    return {x.begin(), x.begin() + static_cast<std::ptrdiff_t>(n)};
}

// Merge sort by value, returning the number of inversions (strict).
std::int64_t sort_count_swaps(std::vector<double>& v, std::vector<double>& buf, std::size_t lo, std::size_t hi) {
    if (hi - lo < 2) return 0;
    const std::size_t mid = lo + (hi - lo) / 2;
    std::int64_t swaps = sort_count_swaps(v, buf, lo, mid) + sort_count_swaps(v, buf, mid, hi);
    std::size_t i = lo, j = mid, k = lo;
    while (i < mid && j < hi) {
        if (v[j] < v[i]) {
            swaps += static_cast<std::int64_t>(mid - i);
            buf[k++] = v[j++];
        } else {
            buf[k++] = v[i++];
        }
    }
    while (i < mid) buf[k++] = v[i++];
    while (j < hi) buf[k++] = v[j++];
    std::copy(buf.begin() + static_cast<std::ptrdiff_t>(lo), buf.begin() + static_cast<std::ptrdiff_t>(hi),
              v.begin() + static_cast<std::ptrdiff_t>(lo));
    return swaps;
}

// Tied pairs within runs of equal values of a sorted sequence.
template <typename Eq>
std::int64_t tied_pairs(std::size_t n, Eq equal) {
    std::int64_t total = 0, run = 1;
    for (std::size_t i = 1; i < n; ++i) {
        if (equal(i - 1, i)) {
            ++run;
        } else {
            total += run * (run - 1) / 2;
            run = 1;
        }
    }
    return total + run * (run - 1) / 2;
}

void require_finite(const std::vector<double>& x) {
    for (double v : x) {
        if (!std::isfinite(v)) throw ParameterError("non-finite value in trace");
    }
}

}  // namespace

std::string to_string(Eye eye) { return eye == Eye::Right ? "right" : "left"; }

Eye parse_eye(const std::string& name) {
    if (name == "right") return Eye::Right;
    if (name == "left") return Eye::Left;
    throw ParameterError("unknown eye '" + name + "' (expected right|left)");
}

std::string to_string(Smoothing s) { return s == Smoothing::None ? "none" : "mov_avg"; }

std::string to_string(ScoreMethod m) {
    switch (m) {
        case ScoreMethod::RapdIndex: return "rapd_index";
        case ScoreMethod::Pearson: return "pearson";
        case ScoreMethod::Spearman: return "spearman";
        case ScoreMethod::Kendall: return "kendall";
    }
    return "rapd_index";
}

Smoothing parse_smoothing(const std::string& name) {
    if (name == "none") return Smoothing::None;
    if (name == "mov_avg") return Smoothing::MovAvg;
    throw ParameterError("unknown smoothing '" + name + "' (expected none|mov_avg)");
}

ScoreMethod parse_method(const std::string& name) {
    if (name == "rapd_index") return ScoreMethod::RapdIndex;
    if (name == "pearson") return ScoreMethod::Pearson;
    if (name == "spearman") return ScoreMethod::Spearman;
    if (name == "kendall") return ScoreMethod::Kendall;
    throw ParameterError("unknown method '" + name + "' (expected rapd_index|pearson|spearman|kendall)");
}

void ReflexTrace::validate() const {
    if (!(fps > 0.0)) throw ParameterError("fps must be positive");
    for (double r : radii) {
        if (!std::isfinite(r) || r <= 0.0) throw ParameterError("trace radii must be positive and finite");
    }
    int prev_end = 0;
    for (const auto& s : schedule) {
        if (s.start_frame < prev_end || s.end_frame <= s.start_frame ||
            s.end_frame > static_cast<int>(radii.size())) {
            throw ParameterError("stimulation intervals must be ordered, disjoint and inside the trace");
        }
        prev_end = s.end_frame;
    }
    if (smoothed && smoothed->size() != radii.size()) throw ContractError("smoothed trace length mismatch");
}

std::vector<double> median_filter_1d(const std::vector<double>& x, int window) {
    if (window < 1 || window % 2 == 0) throw ParameterError("median window must be odd and >= 1");
    const int n = static_cast<int>(x.size());
    const int half = window / 2;
    std::vector<double> out(x.size()), buf;
    for (int i = 0; i < n; ++i) {
        const int lo = std::max(0, i - half), hi = std::min(n - 1, i + half);
        buf.assign(x.begin() + lo, x.begin() + hi + 1);
        std::sort(buf.begin(), buf.end());
        // Lower median when a truncated border window holds an even count.
        out[i] = buf[(buf.size() - 1) / 2];
    }
    return out;
}

std::vector<double> moving_average(const std::vector<double>& x, int window) {
    if (window < 1) throw ParameterError("moving-average window must be >= 1");
    const int n = static_cast<int>(x.size());
    const int before = (window - 1) / 2, after = window / 2;
    std::vector<double> out(x.size());
    for (int i = 0; i < n; ++i) {
        const int lo = std::max(0, i - before), hi = std::min(n - 1, i + after);
        double s = 0.0;
        for (int k = lo; k <= hi; ++k) s += x[k];
        out[i] = s / (hi - lo + 1);
    }
    return out;
}

ReflexTrace smooth(const ReflexTrace& trace, Smoothing smoothing) {
    ReflexTrace out = trace;
    auto s = median_filter_1d(trace.radii, kSmoothingWindow);
    if (smoothing == Smoothing::MovAvg) s = moving_average(s, kSmoothingWindow);
    out.smoothed = std::move(s);
    return out;
}

double pupil_delta(const ReflexTrace& trace, double lead_seconds) {
    if (!trace.smoothed) throw ContractError("pupil_delta requires a smoothed trace");
    const auto& s = *trace.smoothed;
    if (s.empty()) throw ParameterError("trace is empty");
    const int n = static_cast<int>(s.size());
    const int lead = static_cast<int>(std::floor(lead_seconds * trace.fps + 0.5));
    double total = 0.0;
    int windows = 0;
    for (const auto& iv : trace.schedule) {
        if (iv.eye != trace.eye) continue;
        const int start = std::clamp(iv.start_frame, 0, n - 1);
        const int end = std::clamp(iv.end_frame, start + 1, n);
        const double pre = *std::max_element(s.begin() + std::max(0, start - lead), s.begin() + start + 1);
        const double low = *std::min_element(s.begin() + start, s.begin() + end);
        total += std::max(0.0, pre - low);
        ++windows;
    }
    if (windows == 0) {
        const auto [lo, hi] = std::minmax_element(s.begin(), s.end());
        return *hi - *lo;
    }
    return total / windows;
}

RapdScore rapd_index(double delta_r, double delta_l) {
    if (!std::isfinite(delta_r) || !std::isfinite(delta_l)) throw ParameterError("rapd_index needs finite deltas");
    const double a = std::abs(delta_r), b = std::abs(delta_l);
    RapdScore out;
    out.method = ScoreMethod::RapdIndex;
    out.delta_r = delta_r;
    out.delta_l = delta_l;
    const double hi = std::max(a, b);
    if (hi == 0.0) {
        out.value = 0.0;
        out.degenerate = true;
        return out;
    }
    out.value = 1.0 - std::min(a, b) / hi;
    return out;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
    const std::size_t n = std::min(a.size(), b.size());
    if (n == 0) return 0.0;
    const double ma = std::accumulate(a.begin(), a.begin() + static_cast<std::ptrdiff_t>(n), 0.0) / n;
    const double mb = std::accumulate(b.begin(), b.begin() + static_cast<std::ptrdiff_t>(n), 0.0) / n;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double da = a[i] - ma, db = b[i] - mb;
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    if (saa == 0.0 || sbb == 0.0) return 0.0;
    return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

std::vector<double> average_ranks(const std::vector<double>& x) {
    std::vector<std::size_t> idx(x.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t i, std::size_t j) { return x[i] < x[j]; });
    std::vector<double> ranks(x.size());
    for (std::size_t i = 0; i < idx.size();) {
        std::size_t j = i;
        while (j + 1 < idx.size() && x[idx[j + 1]] == x[idx[i]]) ++j;
        const double r = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = r;
        i = j + 1;
    }
    return ranks;
}

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
    const std::size_t n = std::min(a.size(), b.size());
    return pearson(average_ranks(truncated(a, n)), average_ranks(truncated(b, n)));
}

double kendall_tau_b(const std::vector<double>& a, const std::vector<double>& b) {
    const std::size_t n = std::min(a.size(), b.size());
    if (n < 2) return 0.0;
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t i, std::size_t j) {
        return a[i] < a[j] || (a[i] == a[j] && b[i] < b[j]);
    });
    std::vector<double> sa(n), sb(n);
    for (std::size_t i = 0; i < n; ++i) {
        sa[i] = a[idx[i]];
        sb[i] = b[idx[i]];
    }
    const std::int64_t ties_a = tied_pairs(n, [&](std::size_t i, std::size_t j) { return sa[i] == sa[j]; });
    const std::int64_t ties_ab =
        tied_pairs(n, [&](std::size_t i, std::size_t j) { return sa[i] == sa[j] && sb[i] == sb[j]; });
    std::vector<double> buf(n);
    const std::int64_t swaps = sort_count_swaps(sb, buf, 0, n);
    const std::int64_t ties_b = tied_pairs(n, [&](std::size_t i, std::size_t j) { return sb[i] == sb[j]; });
    const std::int64_t pairs = static_cast<std::int64_t>(n) * static_cast<std::int64_t>(n - 1) / 2;
    const std::int64_t num = pairs - ties_a - ties_b + ties_ab - 2 * swaps;
    const double den = std::sqrt(static_cast<double>(pairs - ties_a) * static_cast<double>(pairs - ties_b));
    if (den == 0.0) return 0.0;
    return static_cast<double>(num) / den;
}

RapdScore correlation_dissimilarity(const std::vector<double>& a, const std::vector<double>& b, ScoreMethod kind) {
    if (kind == ScoreMethod::RapdIndex) throw ParameterError("rapd_index is not a correlation method");
    const std::size_t n = std::min(a.size(), b.size());
    if (n < 3) throw ParameterError("correlation needs at least 3 aligned samples");
    const auto x = truncated(a, n), y = truncated(b, n);
    require_finite(x);
    require_finite(y);
    RapdScore out;
    out.method = kind;
    const bool flat_x = std::all_of(x.begin(), x.end(), [&](double v) { return v == x.front(); });
    const bool flat_y = std::all_of(y.begin(), y.end(), [&](double v) { return v == y.front(); });
    if (flat_x || flat_y) {
        out.value = 1.0;
        out.degenerate = true;
        return out;
    }
    double r = 0.0;
    switch (kind) {
        case ScoreMethod::Pearson: r = pearson(x, y); break;
        case ScoreMethod::Spearman: r = spearman(x, y); break;
        default: r = kendall_tau_b(x, y); break;
    }
    out.value = 1.0 - r;
    return out;
}

RapdScore assess_case(const ReflexTrace& right, const ReflexTrace& left, ScoreMethod method, Smoothing smoothing) {
    if (right.radii.empty() || left.radii.empty()) throw ParameterError("assess_case needs non-empty traces");
    right.validate();
    left.validate();
    const ReflexTrace r = smooth(right, smoothing);
    const ReflexTrace l = smooth(left, smoothing);
    if (method == ScoreMethod::RapdIndex) return rapd_index(pupil_delta(r), pupil_delta(l));
    RapdScore s = correlation_dissimilarity(*r.smoothed, *l.smoothed, method);
    return s;
}

}  // namespace rapd::reflex
