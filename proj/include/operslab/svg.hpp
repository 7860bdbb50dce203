#pragma once

// SVG figures in the affine chart x1 = 1, coordinates (u, v) = (x2/x1, x3/x1).

#include <cmath>
#include <cstdio>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "operslab/agd.hpp"
#include "operslab/annulus.hpp"
#include "operslab/linalg.hpp"

namespace operslab::svg {

struct ChartPoint {
    double u;
    double v;
};

/// Fixed viewport [-0.1, 10]^2; the log scale maps both axes by log10 over [1e-3, 10].
class Chart {
public:
    static constexpr double lo = -0.1;
    static constexpr double hi = 10.0;
    static constexpr double log_lo = 1e-3;
    static constexpr double size = 600.0;

    explicit Chart(bool log_scale = false) : log_(log_scale) {}
    bool log_scale() const { return log_; }

    static std::optional<ChartPoint> project(const Vec3& x) {
        if (!(std::abs(x[0]) > 1e-300)) return std::nullopt;
        return ChartPoint{x[1] / x[0], x[2] / x[0]};
    }

    bool visible(const ChartPoint& p) const {
        if (log_) return p.u >= log_lo && p.u <= hi && p.v >= log_lo && p.v <= hi;
        return p.u >= lo && p.u <= hi && p.v >= lo && p.v <= hi;
    }

    double axis(double a) const {
        if (log_) return (std::log10(a) - std::log10(log_lo)) / (std::log10(hi) - std::log10(log_lo));
        return (a - lo) / (hi - lo);
    }
    double px(const ChartPoint& p) const { return axis(p.u) * size; }
    double py(const ChartPoint& p) const { return (1.0 - axis(p.v)) * size; }

private:
    bool log_;
};

/// Accumulates clipped polylines and renders the document.
class Figure {
public:
    explicit Figure(Chart chart) : chart_(chart) {}

    /// Splits the point sequence into visible runs; a run breaks when the chart jumps.
    void polyline(const std::vector<Vec3>& rays, const std::string& stroke, double width = 1.5) {
        std::vector<ChartPoint> run;
        std::optional<ChartPoint> prev;
        for (const Vec3& x : rays) {
            const auto p = Chart::project(x);
            const bool keep = p && chart_.visible(*p) &&
                              (!prev || std::hypot(chart_.px(*p) - chart_.px(*prev), chart_.py(*p) - chart_.py(*prev)) < 0.25 * Chart::size);
            if (!keep) {
                flush(run, stroke, width);
                run.clear();
            }
            if (p && chart_.visible(*p)) run.push_back(*p);
            prev = p;
        }
        flush(run, stroke, width);
    }

    void dot(const Vec3& x, const std::string& fill) {
        const auto p = Chart::project(x);
        if (!p || !chart_.visible(*p)) return;
        char buf[160];
        std::snprintf(buf, sizeof buf, "<circle cx=\"%.3f\" cy=\"%.3f\" r=\"3\" fill=\"%s\"/>\n", chart_.px(*p), chart_.py(*p), fill.c_str());
        body_ += buf;
    }

    std::size_t polyline_count() const { return count_; }

    std::string render(const std::string& title) const {
        std::ostringstream out;
        const int s = static_cast<int>(Chart::size);
        out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << s << "\" height=\"" << s << "\" viewBox=\"0 0 " << s << ' ' << s
            << "\">\n<title>" << title << (chart_.log_scale() ? " (log scale)" : "") << "</title>\n"
            << "<rect width=\"100%\" height=\"100%\" fill=\"white\" stroke=\"black\"/>\n";
        if (!chart_.log_scale()) {
            const ChartPoint o{0.0, 0.0};
            out << "<line x1=\"" << chart_.px(o) << "\" y1=\"0\" x2=\"" << chart_.px(o) << "\" y2=\"" << s << "\" stroke=\"#bbb\"/>\n";
            out << "<line x1=\"0\" y1=\"" << chart_.py(o) << "\" x2=\"" << s << "\" y2=\"" << chart_.py(o) << "\" stroke=\"#bbb\"/>\n";
        }
        out << body_ << "</svg>\n";
        return out.str();
    }

private:
    void flush(const std::vector<ChartPoint>& run, const std::string& stroke, double width) {
        if (run.size() < 2) return;
        body_ += "<polyline fill=\"none\" stroke=\"" + stroke + "\" stroke-width=\"" + std::to_string(width) + "\" points=\"";
        char buf[64];
        for (const ChartPoint& p : run) {
            std::snprintf(buf, sizeof buf, "%.3f,%.3f ", chart_.px(p), chart_.py(p));
            body_ += buf;
        }
        body_ += "\"/>\n";
        ++count_;
    }

    Chart chart_;
    std::string body_;
    std::size_t count_ = 0;
};

inline constexpr long default_periods = 8;

/// Lift points over `periods` periods on either side, extended by the monodromy.
inline std::vector<Vec3> extended_points(const QuasiPeriodicCurve& curve, long periods = default_periods) {
    const long n = static_cast<long>(curve.size());
    std::vector<Vec3> out;
    out.reserve(static_cast<std::size_t>(2 * periods * n + 1));
    for (long k = -periods * n; k <= periods * n; ++k) out.push_back(curve.extended(k).p);
    return out;
}

inline std::string plot_curve(const QuasiPeriodicCurve& curve, bool log_scale = false) {
    Figure fig{Chart(log_scale)};
    fig.polyline(extended_points(curve), "#1f4e9c", 2.0);
    return fig.render("quasi-periodic curve");
}

/// Great circle through two rays, i.e. a projective line.
inline std::vector<Vec3> projective_line(const Vec3& a, const Vec3& b, std::size_t samples = 2000) {
    std::vector<Vec3> out(samples + 1);
    for (std::size_t k = 0; k <= samples; ++k) {
        const double th = 2.0 * std::acos(-1.0) * static_cast<double>(k) / static_cast<double>(samples);
        out[k] = std::cos(th) * a + std::sin(th) * b;
    }
    return out;
}

/// Eigen-triangulation of the monodromy (when positive hyperbolic) with the curve on top.
inline std::string plot_triangles(const QuasiPeriodicCurve& curve, bool log_scale = false) {
    Figure fig{Chart(log_scale)};
    if (const auto spec = classify_positive_hyperbolic(curve.monodromy().matrix())) {
        const Mat3& e = spec->eigenframe;
        for (int i = 0; i < 3; ++i)
            for (int j = i + 1; j < 3; ++j) fig.polyline(projective_line(e.column(i), e.column(j)), "#999", 1.0);
        for (int i = 0; i < 3; ++i) {
            fig.dot(e.column(i), "#c33");
            fig.dot(-1.0 * e.column(i), "#c33");
        }
    }
    fig.polyline(extended_points(curve), "#1f4e9c", 2.0);
    return fig.render("eigen-triangulation");
}

/// Developing images of the boundary curves and of interior fiber levels.
inline std::string plot_annulus(const AnnulusStructure& s, bool log_scale = false, std::size_t levels = 9,
                                long periods = default_periods) {
    Figure fig{Chart(log_scale)};
    const AnnulusGrid& g = s.grid();
    const RealSamples p = resample(s.delta_plus(), g.nx), m = resample(s.delta_minus(), g.nx);
    const long nx = static_cast<long>(g.nx);
    for (std::size_t l = 0; l < levels; ++l) {
        const std::size_t j = l * (g.ny - 1) / (levels - 1);
        std::vector<Vec3> rays;
        for (long k = -periods * nx; k <= periods * nx; ++k) {
            const std::size_t i = static_cast<std::size_t>(((k % nx) + nx) % nx);
            const double x = static_cast<double>(k) / static_cast<double>(nx);
            rays.push_back(developing_map(s.c(), x, s.y(i, j, p, m)).vec());
        }
        const bool edge = l == 0 || l + 1 == levels;
        fig.polyline(rays, edge ? "#1f4e9c" : "#8aa", edge ? 2.0 : 1.0);
    }
    return fig.render("annulus developing image");
}

}  // namespace operslab::svg
