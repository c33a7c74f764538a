#include "rapd/geometry.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "rapd/errors.hpp"

namespace rapd::geometry {

double Ellipse::mean_radius() const { return std::sqrt(a * b); }

namespace {

Point2d to_frame(const Ellipse& e, Point2d p) {
    const double dx = p.x - e.center.x;
    const double dy = p.y - e.center.y;
    const double c = std::cos(e.rotation);
    const double s = std::sin(e.rotation);
    return {dx * c + dy * s, -dx * s + dy * c};
}

double cross(Point2d o, Point2d a, Point2d b) { return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x); }

}  // namespace

bool Ellipse::contains(Point2d p) const {
    const Point2d q = to_frame(*this, p);
    return (q.x * q.x) / (a * a) + (q.y * q.y) / (b * b) <= 1.0;
}

double Ellipse::radial_residual(Point2d p) const {
    const Point2d q = to_frame(*this, p);
    const double r = std::hypot(q.x, q.y);
    if (r == 0.0) return b;
    const double cu = q.x / r;
    const double su = q.y / r;
    const double rho = 1.0 / std::sqrt((cu * cu) / (a * a) + (su * su) / (b * b));
    return std::abs(r - rho);
}

Ellipse fit_ellipse_lsq(std::span<const Point2d> points) {
    const std::size_t n = points.size();
    if (n < 5) throw FitFailed("ellipse fit needs at least 5 points");

    double mx = 0.0, my = 0.0;
    for (const auto& p : points) {
        mx += p.x;
        my += p.y;
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double spread = 0.0;
    for (const auto& p : points) spread += (p.x - mx) * (p.x - mx) + (p.y - my) * (p.y - my);
    spread = std::sqrt(spread / (2.0 * static_cast<double>(n)));
    if (!(spread > 1e-12)) throw FitFailed("ellipse fit: all points coincide");

    Eigen::MatrixXd d1(n, 3), d2(n, 3);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = (points[i].x - mx) / spread;
        const double y = (points[i].y - my) / spread;
        const auto r = static_cast<Eigen::Index>(i);
        d1.row(r) << x * x, x * y, y * y;
        d2.row(r) << x, y, 1.0;
    }
    const Eigen::Matrix3d s1 = d1.transpose() * d1;
    const Eigen::Matrix3d s2 = d1.transpose() * d2;
    const Eigen::Matrix3d s3 = d2.transpose() * d2;

    // s3 is singular exactly when the points are collinear.
    const Eigen::FullPivLU<Eigen::Matrix3d> lu(s3);
    if (lu.rank() < 3 || std::abs(s3.determinant()) < 1e-9 * std::pow(s3.norm(), 3)) {
        throw FitFailed("ellipse fit: degenerate (collinear) point configuration");
    }
    const Eigen::Matrix3d t = -lu.solve(s2.transpose());
    const Eigen::Matrix3d m = s1 + s2 * t;
    Eigen::Matrix3d reduced;
    reduced.row(0) = m.row(2) / 2.0;
    reduced.row(1) = -m.row(1);
    reduced.row(2) = m.row(0) / 2.0;

    const Eigen::EigenSolver<Eigen::Matrix3d> es(reduced);
    if (es.info() != Eigen::Success) throw FitFailed("ellipse fit: eigen decomposition failed");
    Eigen::Vector3d best;
    double best_lambda = std::numeric_limits<double>::infinity();
    bool found = false;
    for (int k = 0; k < 3; ++k) {
        const Eigen::Vector3cd v = es.eigenvectors().col(k);
        if (v.imag().norm() > 1e-9 * v.norm()) continue;
        const Eigen::Vector3d vr = v.real();
        const double cond = 4.0 * vr(0) * vr(2) - vr(1) * vr(1);
        const double lambda = std::abs(es.eigenvalues()(k).real());
        if (cond > 0.0 && lambda < best_lambda) {
            best = vr;
            best_lambda = lambda;
            found = true;
        }
    }
    if (!found) throw FitFailed("ellipse fit: no elliptical solution");
    const Eigen::Vector3d lin = t * best;

    // Scale the conic so its quadratic part is positive definite.
    const double sign = best(0) + best(2) < 0.0 ? -1.0 : 1.0;
    const double A = sign * best(0), B = sign * best(1), C = sign * best(2);
    const double D = sign * lin(0), E = sign * lin(1), F = sign * lin(2);
    const double det = 4.0 * A * C - B * B;
    const double x0 = (B * E - 2.0 * C * D) / det;
    const double y0 = (B * D - 2.0 * A * E) / det;
    const double fc = A * x0 * x0 + B * x0 * y0 + C * y0 * y0 + D * x0 + E * y0 + F;

    Eigen::Matrix2d q;
    q << A, B / 2.0, B / 2.0, C;
    const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> qs(q);
    const double l0 = qs.eigenvalues()(0);
    const double l1 = qs.eigenvalues()(1);
    const double s0 = -fc / l0;
    const double s1v = -fc / l1;
    if (!(s0 > 0.0) || !(s1v > 0.0) || !std::isfinite(s0) || !std::isfinite(s1v)) {
        throw FitFailed("ellipse fit: conic is not a real ellipse");
    }
    // Smaller eigenvalue -> longer semi-axis.
    const double major = std::sqrt(s0);
    const double minor = std::sqrt(s1v);
    const Eigen::Vector2d major_dir = qs.eigenvectors().col(0);

    Ellipse e;
    e.center = {mx + spread * x0, my + spread * y0};
    e.a = major * spread;
    e.b = minor * spread;
    double rot = std::atan2(major_dir(1), major_dir(0));
    rot = std::fmod(rot, std::numbers::pi);
    if (rot < 0.0) rot += std::numbers::pi;
    if (rot >= std::numbers::pi) rot -= std::numbers::pi;
    e.rotation = rot;
    if (!std::isfinite(e.center.x) || !std::isfinite(e.center.y) || !(e.b > 0.0)) {
        throw FitFailed("ellipse fit: non-finite parameters");
    }
    return e;
}

std::vector<Point2d> convex_hull(std::vector<Point2d> pts) {
    std::sort(pts.begin(), pts.end(), [](Point2d a, Point2d b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    if (pts.size() < 3) return pts;
    std::vector<Point2d> hull(2 * pts.size());
    std::size_t k = 0;
    for (const auto& p : pts) {
        while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0.0) --k;
        hull[k++] = p;
    }
    for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
        while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) --k;
        hull[k++] = pts[i];
    }
    hull.resize(k - 1);
    return hull;
}

bool polygon_contains(std::span<const Point2d> hull, Point2d p) {
    if (hull.size() < 3) return false;
    for (std::size_t i = 0; i < hull.size(); ++i) {
        if (cross(hull[i], hull[(i + 1) % hull.size()], p) < 0.0) return false;
    }
    return true;
}

double max_chord_deviation(std::span<const Point2d> points) {
    if (points.empty()) return 0.0;
    const Point2d a = points.front();
    const Point2d b = points.back();
    const double len = std::hypot(b.x - a.x, b.y - a.y);
    double worst = 0.0;
    for (const auto& p : points) {
        const double d = len < 1e-9 ? std::hypot(p.x - a.x, p.y - a.y) : std::abs(cross(a, b, p)) / len;
        worst = std::max(worst, d);
    }
    return worst;
}

}  // namespace rapd::geometry
