#include "rapd/case_io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "rapd/errors.hpp"
#include "rapd/imgproc.hpp"

namespace rapd::case_io {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

std::string frame_name(int i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "frame_%05d.pgm", i);
    return buf;
}

ordered_json truth_json(const std::vector<synth::GroundTruth>& truth) {
    ordered_json arr = ordered_json::array();
    for (const auto& g : truth) arr.push_back({{"x", g.center.x}, {"y", g.center.y}, {"radius", g.radius}});
    return arr;
}

std::vector<synth::GroundTruth> parse_truth(const nlohmann::json& arr) {
    std::vector<synth::GroundTruth> out;
    for (const auto& g : arr) {
        out.push_back({{g.at("x").get<double>(), g.at("y").get<double>()}, g.at("radius").get<double>()});
    }
    return out;
}

std::vector<GrayImage> read_frames(const fs::path& dir, const Manifest& m) {
    std::vector<GrayImage> frames;
    frames.reserve(static_cast<std::size_t>(m.frame_count));
    for (int i = 0; i < m.frame_count; ++i) {
        const std::string path = (dir / frame_name(i)).string();
        frames.push_back(imgproc::read_pgm(path));
        if (frames.back().width() != m.width || frames.back().height() != m.height) {
            throw IngestionError(path + ": frame size does not match the manifest frame_size");
        }
    }
    return frames;
}

}  // namespace

std::string label_name(bool rapd_positive) { return rapd_positive ? "rapd_positive" : "no_rapd"; }

Manifest manifest_of(const synth::TestCase& tc) {
    Manifest m;
    m.case_id = tc.case_id;
    m.fps = tc.params.fps;
    m.width = tc.params.width;
    m.height = tc.params.height;
    m.frame_count = static_cast<int>(tc.truth_right.size());
    m.schedule = tc.schedule;
    m.rapd_positive = tc.rapd_positive;
    m.affected_eye = tc.affected_eye;
    if (tc.rapd_positive) m.alpha = tc.alpha;
    m.truth_right = tc.truth_right;
    m.truth_left = tc.truth_left;
    m.analytic_index = tc.analytic_index;
    return m;
}

std::string manifest_json(const Manifest& m) {
    ordered_json j;
    j["case_id"] = m.case_id;
    j["fps"] = m.fps;
    j["frame_size"] = {m.width, m.height};
    j["frame_count"] = m.frame_count;
    ordered_json sched = ordered_json::array();
    for (const auto& s : m.schedule) {
        sched.push_back({{"eye_stimulated", reflex::to_string(s.eye)},
                         {"start_frame", s.start_frame},
                         {"end_frame", s.end_frame}});
    }
    j["schedule"] = sched;
    j["label"] = label_name(m.rapd_positive);
    j["affected_eye"] = m.affected_eye ? ordered_json(reflex::to_string(*m.affected_eye)) : ordered_json(nullptr);
    j["alpha"] = m.alpha ? ordered_json(*m.alpha) : ordered_json(nullptr);
    if (m.truth_right && m.truth_left) {
        j["ground_truth"] = {{"right", truth_json(*m.truth_right)}, {"left", truth_json(*m.truth_left)}};
    }
    if (m.analytic_index) j["analytic_index"] = *m.analytic_index;
    return j.dump(2) + "\n";
}

Manifest parse_manifest(const std::string& text, const std::string& origin) {
    try {
        const auto j = nlohmann::json::parse(text);
        Manifest m;
        m.case_id = j.at("case_id").get<std::string>();
        m.fps = j.at("fps").get<double>();
        const auto& size = j.at("frame_size");
        m.width = size.at(0).get<int>();
        m.height = size.at(1).get<int>();
        m.frame_count = j.at("frame_count").get<int>();
        for (const auto& s : j.at("schedule")) {
            m.schedule.push_back({reflex::parse_eye(s.at("eye_stimulated").get<std::string>()),
                                  s.at("start_frame").get<int>(), s.at("end_frame").get<int>()});
        }
        const auto label = j.at("label").get<std::string>();
        if (label != "rapd_positive" && label != "no_rapd") throw IngestionError("unknown label '" + label + "'");
        m.rapd_positive = label == "rapd_positive";
        if (j.contains("affected_eye") && !j["affected_eye"].is_null()) {
            m.affected_eye = reflex::parse_eye(j["affected_eye"].get<std::string>());
        }
        if (j.contains("alpha") && !j["alpha"].is_null()) m.alpha = j["alpha"].get<double>();
        if (j.contains("ground_truth") && !j["ground_truth"].is_null()) {
            m.truth_right = parse_truth(j["ground_truth"].at("right"));
            m.truth_left = parse_truth(j["ground_truth"].at("left"));
        }
        if (j.contains("analytic_index") && !j["analytic_index"].is_null()) {
            m.analytic_index = j["analytic_index"].get<double>();
        }
        if (!(m.fps > 0.0) || m.frame_count < 1) throw IngestionError("fps and frame_count must be positive");
        return m;
    } catch (const IngestionError& e) {
        throw IngestionError(origin + ": " + e.what());
    } catch (const std::exception& e) {
        throw IngestionError(origin + ": malformed manifest: " + e.what());
    }
}

fs::path write_case(const synth::TestCase& tc, const fs::path& root) {
    const fs::path dir = root / tc.case_id;
    std::error_code ec;
    fs::create_directories(dir / "right", ec);
    fs::create_directories(dir / "left", ec);
    if (ec) throw IngestionError("cannot create case directory " + dir.string() + ": " + ec.message());
    for (std::size_t i = 0; i < tc.right_frames.size(); ++i) {
        imgproc::write_pgm((dir / "right" / frame_name(static_cast<int>(i))).string(), tc.right_frames[i]);
        imgproc::write_pgm((dir / "left" / frame_name(static_cast<int>(i))).string(), tc.left_frames[i]);
    }
    std::ofstream out(dir / "manifest.json", std::ios::binary);
    if (!out) throw IngestionError("cannot write " + (dir / "manifest.json").string());
    out << manifest_json(manifest_of(tc));
    return dir;
}

Manifest read_manifest(const fs::path& case_dir) {
    const fs::path path = case_dir / "manifest.json";
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IngestionError("missing manifest: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_manifest(ss.str(), path.string());
}

CaseData read_case(const fs::path& case_dir) {
    CaseData data;
    data.manifest = read_manifest(case_dir);
    data.right = read_frames(case_dir / "right", data.manifest);
    data.left = read_frames(case_dir / "left", data.manifest);
    return data;
}

std::vector<fs::path> list_cases(const fs::path& root) {
    if (!fs::is_directory(root)) throw IngestionError("corpus directory not found: " + root.string());
    std::vector<fs::path> out;
    for (const auto& entry : fs::directory_iterator(root)) {
        if (entry.is_directory() && fs::exists(entry.path() / "manifest.json")) out.push_back(entry.path());
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace rapd::case_io
