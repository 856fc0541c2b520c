#include <nlohmann/json.hpp>
#include <sstream>

#include "lfray/json_io.hpp"

namespace lfray {

namespace {

struct View {
    double xlo, xhi, ylo, yhi;
    double width = 820.0, height = 640.0, margin = 40.0;

    double px(double x) const {
        return margin + (x - xlo) / (xhi - xlo) * (width - 2 * margin);
    }
    double py(double y) const {
        return height - margin - (y - ylo) / (yhi - ylo) * (height - 2 * margin);
    }
};

void polyline(std::ostringstream& os, const View& v, const std::vector<Eigen::Vector2d>& pts,
              const std::string& style) {
    os << "<polyline fill=\"none\" " << style << " points=\"";
    for (const auto& p : pts) os << v.px(p.x()) << "," << v.py(p.y()) << " ";
    os << "\"/>\n";
}

}  // namespace

std::string trajectory_svg(const SceneConfig& scene, const std::vector<Trajectory>& trajs,
                           int proj_x, int proj_y) {
    View view{scene.chart.lo(proj_x), scene.chart.hi(proj_x), scene.chart.lo(proj_y),
              scene.chart.hi(proj_y)};

    std::ostringstream os;
    os.precision(6);
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << view.width << "\" height=\""
       << view.height << "\" viewBox=\"0 0 " << view.width << " " << view.height << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

    // Interface zero set sampled in the projection plane through the first
    // trajectory start (remaining coordinates held fixed).
    Vec base = trajs.empty() ? ((scene.chart.lo + scene.chart.hi) / 2.0).eval()
                             : trajs.front().segments.front().samples.front().x;
    {
        const int nsamp = 240;
        std::vector<Eigen::Vector2d> run;
        for (int i = 0; i <= nsamp; ++i) {
            const double a = view.xlo + (view.xhi - view.xlo) * i / nsamp;
            // scan the projection column for a sign change of the level set
            double prev_b = view.ylo;
            Vec q = base;
            q(proj_x) = a;
            q(proj_y) = prev_b;
            double prev_f = scene.interface_spec.level(q);
            bool found = false;
            for (int k = 1; k <= nsamp; ++k) {
                const double b = view.ylo + (view.yhi - view.ylo) * k / nsamp;
                q(proj_y) = b;
                const double f = scene.interface_spec.level(q);
                if (prev_f * f <= 0.0 && prev_f != f) {
                    const double t = prev_f / (prev_f - f);
                    run.push_back({a, prev_b + t * (b - prev_b)});
                    found = true;
                    break;
                }
                prev_b = b;
                prev_f = f;
            }
            if (!found && !run.empty()) {
                polyline(os, view, run, "stroke=\"#888888\" stroke-width=\"1.5\"");
                run.clear();
            }
        }
        if (!run.empty()) polyline(os, view, run, "stroke=\"#888888\" stroke-width=\"1.5\"");
    }

    const char* colors[] = {"#1f6fb2", "#b24a1f", "#3a9e4f", "#8b4ab2"};
    int ci = 0;
    for (const auto& traj : trajs) {
        for (const auto& seg : traj.segments) {
            std::vector<Eigen::Vector2d> pts;
            const size_t stride = std::max<size_t>(1, seg.samples.size() / 400);
            for (size_t i = 0; i < seg.samples.size(); i += stride)
                pts.push_back({seg.samples[i].x(proj_x), seg.samples[i].x(proj_y)});
            pts.push_back({seg.samples.back().x(proj_x), seg.samples.back().x(proj_y)});
            std::ostringstream style;
            style << "stroke=\"" << colors[ci % 4] << "\" stroke-width=\"2\"";
            polyline(os, view, pts, style.str());
        }

        // cone glyphs and direction fans at each interface event
        for (const auto& ev : traj.events) {
            const Vec& p = ev.crossing.point;
            const double glyph = 0.06 * std::min(view.xhi - view.xlo, view.yhi - view.ylo);
            const Metric& m_in = scene.metric_for_side(
                ev.from_medium == 2 ? Side::Medium2 : Side::Medium1);
            try {
                for (const auto& d : indicatrix_sample(m_in, p, 48)) {
                    const Vec q = p + glyph * d / std::max(1.0, d.norm());
                    os << "<line x1=\"" << view.px(p(proj_x)) << "\" y1=\"" << view.py(p(proj_y))
                       << "\" x2=\"" << view.px(q(proj_x)) << "\" y2=\"" << view.py(q(proj_y))
                       << "\" stroke=\"#cccccc\" stroke-width=\"0.6\"/>\n";
                }
            } catch (const Error&) {
            }
            auto arrow = [&](const Vec& d, const char* color) {
                const Vec q = p + 1.6 * glyph * d / d.norm();
                os << "<line x1=\"" << view.px(p(proj_x)) << "\" y1=\"" << view.py(p(proj_y))
                   << "\" x2=\"" << view.px(q(proj_x)) << "\" y2=\"" << view.py(q(proj_y))
                   << "\" stroke=\"" << color << "\" stroke-width=\"1.6\"/>\n";
            };
            arrow(-ev.crossing.incoming, "#555555");
            if (ev.refraction)
                for (const auto& d : ev.refraction->directions)
                    arrow(d.dir, d.exceptional ? "#d02020"
                                               : (d.straight_oriented ? "#3a9e4f" : "#e0a020"));
            if (ev.reflection)
                for (const auto& d : ev.reflection->directions)
                    arrow(d.dir, d.exceptional ? "#d02020"
                                               : (d.straight_oriented ? "#3a9e4f" : "#e0a020"));
            os << "<circle cx=\"" << view.px(p(proj_x)) << "\" cy=\"" << view.py(p(proj_y))
               << "\" r=\"3\" fill=\"#202020\"/>\n";
        }
        ++ci;
    }

    os << "<text x=\"" << view.margin << "\" y=\"" << view.height - 10
       << "\" font-family=\"monospace\" font-size=\"12\">axes: x" << proj_x << " / x" << proj_y
       << "</text>\n";
    os << "</svg>\n";
    return os.str();
}

}  // namespace lfray
