#include "rapd/app/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <map>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include "rapd/errors.hpp"
#include "rapd/patch.hpp"

namespace rapd::app {

namespace {

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

reflex::ReflexTrace trace_of(const CaseMeasurement& m, reflex::Eye eye) {
    const auto& t = eye == reflex::Eye::Right ? *m.right : *m.left;
    return reflex::ReflexTrace{eye, m.fps, t.radii, m.schedule, std::nullopt};
}

}  // namespace

void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn) {
    const std::size_t threads = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, workers)));
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
}

Localizer make_localizer(LocalizerKind kind, const patch::ClassifierModel* model) {
    switch (kind) {
        case LocalizerKind::Starburst:
            return [](const GrayImage& img) { return localize::starburst_localize(img); };
        case LocalizerKind::ExCuSe:
            return [](const GrayImage& img) { return localize::excuse_localize(img); };
        case LocalizerKind::ElSe:
            return [](const GrayImage& img) { return localize::else_localize(img); };
        case LocalizerKind::Patch:
            if (model == nullptr) throw ParameterError("the patch localizer requires a classifier weight file");
            return [model](const GrayImage& img) { return patch::patch_localize(*model, img, kRuntimePatchSize); };
    }
    throw ParameterError("unknown localizer");
}

case_io::CaseData case_data_of(synth::TestCase&& tc) {
    case_io::CaseData data;
    data.manifest = case_io::manifest_of(tc);
    data.right = std::move(tc.right_frames);
    data.left = std::move(tc.left_frames);
    return data;
}

CaseMeasurement measure_case(const case_io::CaseData& data, LocalizerKind localizer, measure::CropMode crop,
                             const patch::ClassifierModel* model) {
    CaseMeasurement m;
    m.case_id = data.manifest.case_id;
    m.rapd_positive = data.manifest.rapd_positive;
    m.fps = data.manifest.fps;
    m.schedule = data.manifest.schedule;
    const Localizer loc = make_localizer(localizer, model);
    try {
        m.right = measure::measure_sequence(data.right, loc, crop);
        m.left = measure::measure_sequence(data.left, loc, crop);
    } catch (const TraceUnusable& e) {
        m.right.reset();
        m.left.reset();
        m.error = e.what();
    }
    return m;
}

reflex::RapdScore score_case(const CaseMeasurement& m, reflex::Smoothing smoothing, reflex::ScoreMethod method) {
    if (!m.ok()) {
        reflex::RapdScore s;
        s.value = 1.0;
        s.method = method;
        s.degenerate = true;
        return s;
    }
    return reflex::assess_case(trace_of(m, reflex::Eye::Right), trace_of(m, reflex::Eye::Left), method, smoothing);
}

std::string BenchmarkRow::slug() const {
    return to_string(localizer) + "_" + measure::to_string(crop) + "_" + reflex::to_string(smoothing) + "_" +
           reflex::to_string(method);
}

std::vector<BenchmarkRow> evaluate(std::size_t case_count, const CaseSource& source, const GridConfig& grid,
                                   const patch::ClassifierModel* model, int workers) {
    if (case_count == 0) throw ParameterError("no cases to evaluate");
    struct Key {
        LocalizerKind localizer;
        measure::CropMode crop;
    };
    std::vector<Key> keys;
    for (auto l : grid.localizers) {
        for (auto c : grid.crops) keys.push_back({l, c});
    }
    if (keys.empty() || grid.smoothings.empty() || grid.methods.empty()) throw ParameterError("empty evaluation grid");
    for (const auto& k : keys) {
        if (k.localizer == LocalizerKind::Patch && model == nullptr) {
            throw ParameterError("the patch localizer requires a classifier weight file");
        }
    }

    // measured[case][key]
    std::vector<std::vector<CaseMeasurement>> measured(case_count);
    parallel_for(case_count, workers, [&](std::size_t i) {
        const case_io::CaseData data = source(i);
        for (const auto& k : keys) measured[i].push_back(measure_case(data, k.localizer, k.crop, model));
    });

    std::vector<BenchmarkRow> rows;
    for (std::size_t k = 0; k < keys.size(); ++k) {
        for (auto smoothing : grid.smoothings) {
            for (auto method : grid.methods) {
                BenchmarkRow row;
                row.localizer = keys[k].localizer;
                row.crop = keys[k].crop;
                row.smoothing = smoothing;
                row.method = method;
                std::vector<double> scores;
                std::vector<bool> labels;
                for (std::size_t i = 0; i < case_count; ++i) {
                    const auto& m = measured[i][k];
                    const auto s = score_case(m, smoothing, method);
                    row.scatter.push_back({m.case_id, m.rapd_positive, s.value, !m.ok()});
                    row.failed_cases += m.ok() ? 0 : 1;
                    scores.push_back(s.value);
                    labels.push_back(m.rapd_positive);
                }
                row.threshold = metrics::select_threshold(scores, labels);
                row.counts = metrics::confusion(labels, metrics::decide(scores, row.threshold));
                row.report = metrics::metric_suite(row.counts);
                row.roc = metrics::roc_sweep(scores, labels);
                rows.push_back(std::move(row));
            }
        }
    }
    return rows;
}

std::string benchmark_csv(const std::vector<BenchmarkRow>& rows) {
    std::ostringstream out;
    out << "localizer,crop,smoothing,method,threshold,tp,tn,fp,fn,precision,sensitivity,fpr,specificity,fnr,"
           "accuracy,balanced_accuracy,f1,auc_roc,auc_pr,failed_cases\n";
    for (const auto& r : rows) {
        const auto& m = r.report;
        out << to_string(r.localizer) << ',' << measure::to_string(r.crop) << ',' << reflex::to_string(r.smoothing)
            << ',' << reflex::to_string(r.method) << ',' << fmt(r.threshold) << ',' << r.counts.tp << ','
            << r.counts.tn << ',' << r.counts.fp << ',' << r.counts.fn << ',' << fmt(m.precision) << ','
            << fmt(m.sensitivity) << ',' << fmt(m.fpr) << ',' << fmt(m.specificity) << ',' << fmt(m.fnr) << ','
            << fmt(m.accuracy) << ',' << fmt(m.balanced_accuracy) << ',' << fmt(m.f1) << ',' << fmt(r.roc.auc_roc)
            << ',' << fmt(r.roc.auc_pr) << ',' << r.failed_cases << '\n';
    }
    return out.str();
}

std::string scatter_csv(const BenchmarkRow& row) {
    std::ostringstream out;
    out << "case_id,label,score,failed\n";
    for (const auto& p : row.scatter) {
        out << p.case_id << ',' << case_io::label_name(p.rapd_positive) << ',' << fmt(p.score) << ','
            << (p.failed ? 1 : 0) << '\n';
    }
    return out.str();
}

std::vector<patch::LabeledPatch> collect_patches(const case_io::CaseData& data, const PatchDataOptions& opts) {
    const auto& m = data.manifest;
    if (!m.truth_right || !m.truth_left) {
        throw IngestionError("case " + m.case_id + " has no ground truth; cannot extract training patches");
    }
    if (opts.frame_stride < 1) throw ParameterError("frame stride must be >= 1");
    std::vector<patch::LabeledPatch> out;
    std::uint64_t salt = 0;
    for (reflex::Eye eye : {reflex::Eye::Right, reflex::Eye::Left}) {
        const auto& frames = eye == reflex::Eye::Right ? data.right : data.left;
        const auto& truth = eye == reflex::Eye::Right ? *m.truth_right : *m.truth_left;
        for (std::size_t i = 0; i < frames.size() && i < truth.size(); i += static_cast<std::size_t>(opts.frame_stride)) {
            const auto seed = synth::mix_seed(opts.seed, synth::mix_seed(std::hash<std::string>{}(m.case_id), ++salt));
            for (auto& s : patch::extract_labeled_patches(frames[i], truth[i].center, opts.patch_size, seed)) {
                out.push_back({std::move(s.pixels), *s.label});
            }
        }
    }
    return out;
}

PatchSplit split_patches(std::vector<patch::LabeledPatch> patches, const SplitSpec& spec) {
    if (spec.train <= 0.0 || spec.val <= 0.0 || spec.test < 0.0 ||
        std::abs(spec.train + spec.val + spec.test - 1.0) > 1e-9) {
        throw ParameterError("split fractions must be positive and sum to 1");
    }
    std::mt19937_64 rng(spec.seed);
    std::shuffle(patches.begin(), patches.end(), rng);
    const auto n = patches.size();
    const auto n_train = static_cast<std::size_t>(std::floor(spec.train * n + 0.5));
    const auto n_val = std::min(n - n_train, static_cast<std::size_t>(std::floor(spec.val * n + 0.5)));
    PatchSplit out;
    auto it = std::make_move_iterator(patches.begin());
    out.train.assign(it, it + static_cast<std::ptrdiff_t>(n_train));
    out.val.assign(it + static_cast<std::ptrdiff_t>(n_train), it + static_cast<std::ptrdiff_t>(n_train + n_val));
    out.test.assign(it + static_cast<std::ptrdiff_t>(n_train + n_val), std::make_move_iterator(patches.end()));
    return out;
}

TrainReport train_from_cases(std::size_t case_count, const CaseSource& source, const PatchDataOptions& data_opts,
                             const patch::TrainOptions& train_opts, const SplitSpec& split) {
    if (case_count == 0) throw ParameterError("no cases to train on");
    if (train_opts.epochs < 1) throw ParameterError("epochs must be >= 1");
    std::vector<patch::LabeledPatch> all;
    for (std::size_t i = 0; i < case_count; ++i) {
        auto p = collect_patches(source(i), data_opts);
        all.insert(all.end(), std::make_move_iterator(p.begin()), std::make_move_iterator(p.end()));
    }
    PatchSplit parts = split_patches(std::move(all), split);
    TrainReport report;
    report.model = patch::train_baseline_classifier(parts.train, parts.val, train_opts);
    report.train_accuracy = patch::accuracy(report.model, parts.train);
    report.val_accuracy = report.model.val_accuracy;
    report.test_accuracy = parts.test.empty() ? 0.0 : patch::accuracy(report.model, parts.test);
    report.train_size = parts.train.size();
    report.val_size = parts.val.size();
    report.test_size = parts.test.size();
    return report;
}

}  // namespace rapd::app
