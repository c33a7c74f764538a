#include "rapd/measure.hpp"

#include <cstdio>
#include <sstream>

#include "rapd/errors.hpp"
#include "rapd/imgproc.hpp"

namespace rapd::measure {

std::string to_string(CropMode mode) { return mode == CropMode::HalfImage ? "half_image" : "fixed_60"; }

CropMode parse_crop(const std::string& name) {
    if (name == "half_image") return CropMode::HalfImage;
    if (name == "fixed_60") return CropMode::Fixed60;
    throw ParameterError("unknown crop mode '" + name + "' (expected half_image|fixed_60)");
}

int auto_downsample_factor(const GrayImage& frame) { return frame.width() >= 1280 ? 4 : 1; }

std::vector<double> fill_gaps(const std::vector<std::optional<double>>& values) {
    const int n = static_cast<int>(values.size());
    std::vector<double> out(values.size(), 0.0);
    for (int i = 0; i < n; ++i) {
        if (values[i]) {
            out[i] = *values[i];
            continue;
        }
        bool found = false;
        for (int d = 1; d < n && !found; ++d) {
            if (i - d >= 0 && values[i - d]) {
                out[i] = *values[i - d];
                found = true;
            } else if (i + d < n && values[i + d]) {
                out[i] = *values[i + d];
                found = true;
            }
        }
        if (!found) throw TraceUnusable("no measured frame to fill gaps from");
    }
    return out;
}

MeasuredTrace measure_sequence(const std::vector<GrayImage>& frames, const Localizer& localizer, CropMode crop,
                               const hough::HoughConfig& cfg, int downsample) {
    if (frames.empty()) throw ParameterError("frame sequence is empty");
    if (downsample < 0) throw ParameterError("downsample factor must be >= 0");
    cfg.validate();
    MeasuredTrace trace;
    trace.downsample = downsample == 0 ? auto_downsample_factor(frames.front()) : downsample;
    std::vector<std::optional<double>> raw;
    raw.reserve(frames.size());
    for (std::size_t i = 0; i < frames.size(); ++i) {
        FrameMeasurement m;
        m.frame_index = static_cast<int>(i);
        try {
            const GrayImage work =
                trace.downsample > 1 ? imgproc::downsample_box(frames[i], trace.downsample) : frames[i];
            const PupilFit fit = localizer(work);
            const int cw = crop == CropMode::HalfImage ? work.width() / 2 : 60;
            const int ch = crop == CropMode::HalfImage ? work.height() / 2 : 60;
            const auto win = imgproc::crop_window(work.width(), work.height(), fit.center, cw, ch);
            const auto circle = hough::auto_hough(imgproc::crop(work, win), cfg);
            m.center = {circle.center.x + win.x0, circle.center.y + win.y0};
            m.radius = circle.radius;
            m.votes = circle.votes;
            m.status = "ok";
        } catch (const LocalizationFailed& e) {
            m.status = std::string("localization_failed: ") + e.what();
        } catch (const FitFailed& e) {
            m.status = std::string("localization_failed: ") + e.what();
        } catch (const MeasurementFailed& e) {
            m.status = std::string("measurement_failed: ") + e.what();
        }
        if (!m.radius) ++trace.failures;
        raw.push_back(m.radius);
        trace.frames.push_back(std::move(m));
    }
    if (2 * trace.failures > static_cast<int>(frames.size())) {
        throw TraceUnusable(std::to_string(trace.failures) + " of " + std::to_string(frames.size()) +
                            " frames failed");
    }
    trace.radii = fill_gaps(raw);
    return trace;
}

std::string measurements_csv(const MeasuredTrace& trace) {
    std::ostringstream out;
    out << "frame_index,x,y,radius,votes,status\n";
    char buf[128];
    for (const auto& m : trace.frames) {
        if (m.radius) {
            std::snprintf(buf, sizeof buf, "%d,%.4f,%.4f,%.4f,%d,", m.frame_index, m.center.x, m.center.y, *m.radius,
                          m.votes);
        } else {
            std::snprintf(buf, sizeof buf, "%d,,,,0,", m.frame_index);
        }
        out << buf << (m.status.find(',') == std::string::npos ? m.status : "\"" + m.status + "\"") << "\n";
    }
    return out.str();
}

}  // namespace rapd::measure
