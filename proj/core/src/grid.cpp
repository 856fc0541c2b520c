#include "lfray/grid.hpp"

#include <cmath>
#include <random>
#include <unordered_map>

namespace lfray {

CellComplex::CellComplex(const GridScene& grid, int jitter_draw) : grid_(&grid) {
    const int d = static_cast<int>(grid.box.lo.size());
    if (static_cast<int>(grid.resolution.size()) != d)
        throw InvalidInputError("grid: resolution size does not match the box dimension");
    for (int r : grid.resolution)
        if (r < 2) throw InvalidInputError("grid: resolution must be >= 2 per axis");
    res_ = grid.resolution;
    cell_size_ = Vec(d);
    for (int i = 0; i < d; ++i) cell_size_(i) = (grid.box.hi(i) - grid.box.lo(i)) / res_[i];

    std::mt19937_64 rng(grid.seed + 0x9e3779b97f4a7c15ULL * (jitter_draw + 1));
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    origin_ = grid.box.lo;
    for (int i = 0; i < d; ++i) origin_(i) += grid.jitter_scale * cell_size_(i) * uni(rng);
}

long CellComplex::flat_index(const std::vector<int>& idx) const {
    long flat = 0;
    for (size_t i = 0; i < idx.size(); ++i) flat = flat * (res_[i] + 2) + (idx[i] + 1);
    return flat;
}

std::vector<int> CellComplex::cell_of(const Vec& x) const {
    std::vector<int> idx(x.size());
    for (int i = 0; i < x.size(); ++i)
        idx[i] = static_cast<int>(std::floor((x(i) - origin_(i)) / cell_size_(i)));
    return idx;
}

Vec CellComplex::center_of(const std::vector<int>& idx) const {
    Vec c(origin_.size());
    for (size_t i = 0; i < idx.size(); ++i) c(i) = origin_(i) + (idx[i] + 0.5) * cell_size_(i);
    return c;
}

bool CellComplex::inside(const std::vector<int>& idx) const {
    for (size_t i = 0; i < idx.size(); ++i)
        if (idx[i] < -1 || idx[i] > res_[i]) return false;
    return true;
}

const Metric& CellComplex::cell_metric(const std::vector<int>& idx) const {
    const long key = flat_index(idx);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    Vec c = center_of(idx);
    // Clamp edge cells into the chart so frozen coefficients stay evaluable.
    for (int i = 0; i < c.size(); ++i)
        c(i) = std::clamp(c(i), grid_->box.lo(i), grid_->box.hi(i));
    const Metric* source = &grid_->metric1;
    if (grid_->interface_spec && grid_->interface_spec->level(c) > 0.0) source = &grid_->metric2;
    Metric frozen = source->frozen_at(c);
    frozen.set_chart(Box());  // frozen cells extend past the box edge
    return cache_.emplace(key, std::move(frozen)).first->second;
}

CellComplex discretize(const GridScene& grid, int jitter_draw) {
    return CellComplex(grid, jitter_draw);
}

namespace {

struct FaceHit {
    double s;
    int axis;
    int dir_sign;
    bool box_exit;
};

std::optional<FaceHit> next_face(const CellComplex& cells, const Box& box,
                                 const std::vector<int>& idx, const Vec& x, const Vec& v) {
    const int d = static_cast<int>(x.size());
    std::optional<FaceHit> best;
    for (int i = 0; i < d; ++i) {
        if (v(i) == 0.0) continue;
        const double boundary = cells.origin()(i) +
                                (idx[i] + (v(i) > 0.0 ? 1 : 0)) * cells.cell_size()(i);
        const double s = (boundary - x(i)) / v(i);
        if (s <= 1e-13) continue;
        if (!best || s < best->s) best = FaceHit{s, i, v(i) > 0.0 ? 1 : -1, false};
    }
    // The chart-box exit can precede the next interior face on edge cells
    // (the jittered lattice does not line up with the box).
    std::optional<FaceHit> exit_hit;
    for (int i = 0; i < d; ++i) {
        if (v(i) == 0.0) continue;
        const double boundary = v(i) > 0.0 ? box.hi(i) : box.lo(i);
        const double s = (boundary - x(i)) / v(i);
        if (s <= 1e-13) continue;
        if (!exit_hit || s < exit_hit->s) exit_hit = FaceHit{s, i, v(i) > 0.0 ? 1 : -1, true};
    }
    if (!best) return exit_hit;
    if (exit_hit && exit_hit->s <= best->s + 1e-12 * std::max(1.0, best->s)) return exit_hit;
    return best;
}

struct DegenerateFace {};

}  // namespace

Trajectory trace_discretized(const GridScene& grid, const Vec& start, const Vec& dir,
                             int max_events, const Tolerances& tol, int stop_axis,
                             double stop_value) {
    for (int attempt = 0; attempt < 5; ++attempt) {
        const CellComplex cells(grid, attempt);
        Trajectory traj;
        Vec x = start;
        std::vector<int> idx = cells.cell_of(x);
        Vec v = project_to_cone(cells.cell_metric(idx), x, dir, tol);
        {
            const Vec omega = cells.cell_metric(idx).time_covector(x);
            v /= omega.dot(v);
        }
        double s_acc = 0.0;

        try {
            for (int e = 0; e < max_events; ++e) {
                const Metric& cur = cells.cell_metric(idx);

                // Stopping plane crossing inside the current cell.
                if (stop_axis >= 0 && v(stop_axis) != 0.0) {
                    const double s_stop = (stop_value - x(stop_axis)) / v(stop_axis);
                    auto face_probe = next_face(cells, grid.box, idx, x, v);
                    if (s_stop > 1e-13 && (!face_probe || s_stop <= face_probe->s)) {
                        Segment seg;
                        seg.medium = 1;
                        seg.samples.push_back({x, v, s_acc});
                        seg.samples.push_back({x + s_stop * v, v, s_acc + s_stop});
                        seg.stop_reason = StopReason::ReceiverHit;
                        traj.segments.push_back(std::move(seg));
                        traj.status = TraceStatus::ReceiverHit;
                        return traj;
                    }
                }

                auto face = next_face(cells, grid.box, idx, x, v);
                if (!face) {
                    traj.status = TraceStatus::Unresolvable;
                    return traj;
                }
                const Vec xf = x + face->s * v;

                Segment seg;
                seg.medium = 1;
                seg.samples.push_back({x, v, s_acc});
                seg.samples.push_back({xf, v, s_acc + face->s});
                seg.stop_reason =
                    face->box_exit ? StopReason::BoundsExit : StopReason::InterfaceHit;
                traj.segments.push_back(std::move(seg));
                s_acc += face->s;

                if (face->box_exit || !grid.box.contains(xf)) {
                    traj.status = TraceStatus::BoundsExit;
                    return traj;
                }

                std::vector<int> next_idx = idx;
                next_idx[face->axis] += face->dir_sign;
                if (!cells.inside(next_idx)) {
                    traj.status = TraceStatus::BoundsExit;
                    return traj;
                }
                const Metric& nxt = cells.cell_metric(next_idx);

                // Identical frozen coefficients: the cone structure is
                // continuous across this face and the ray passes unbroken.
                if (Metric::same_coefficients(cur, xf, nxt, xf, 1e-15)) {
                    idx = std::move(next_idx);
                    x = xf;
                    continue;
                }

                Vec normal = Vec::Zero(x.size());
                normal(face->axis) = face->dir_sign;
                const InterfaceSpec face_plane = InterfaceSpec::plane(normal, normal.dot(xf));

                const IncidentData inc = incident_data(cur, nxt, face_plane, xf, v, tol);
                SnellOutcome refr = solve_refraction(cur, nxt, face_plane, inc, tol);
                if (refr.borderline) throw DegenerateFace{};

                TraceEvent ev;
                ev.crossing.tau = s_acc;
                ev.crossing.point = xf;
                ev.crossing.incoming = v;
                ev.crossing.tangent_basis = kernel_basis(normal);
                ev.crossing.transverse = normal;
                ev.refraction = refr;
                ev.from_medium = 1;
                ev.to_medium = 2;

                int pick = -1;
                for (size_t i = 0; i < refr.directions.size(); ++i) {
                    const auto& dcand = refr.directions[i];
                    if (!dcand.exceptional && dcand.straight_oriented) {
                        pick = static_cast<int>(i);
                        break;
                    }
                }
                if (pick < 0) {
                    SnellOutcome refl = solve_reflection(cur, nxt, face_plane, inc, tol);
                    if (refl.borderline) throw DegenerateFace{};
                    ev.reflection = refl;
                    for (size_t i = 0; i < refl.directions.size(); ++i) {
                        if (!refl.directions[i].exceptional) {
                            pick = static_cast<int>(i);
                            break;
                        }
                    }
                    if (pick < 0)
                        throw TrappedError("trace_discretized: unresolvable face (no crossing, no returning)");
                    ev.chose_reflection = true;
                    ev.to_medium = 1;
                    ev.total_reflection = refr.refraction_case ==
                                          RefractionCase::A_iii_NoCriticalPoints;
                }
                ev.chosen_branch = pick;
                v = ev.chosen_direction().dir;
                traj.events.push_back(std::move(ev));

                idx = std::move(next_idx);
                x = xf;
            }
            traj.status = TraceStatus::MaxEvents;
            return traj;
        } catch (const DegenerateFace&) {
            continue;  // re-jitter and retrace
        }
    }
    throw TrappedError("trace_discretized: degenerate faces persist across jitter retries");
}

ConvergenceTable convergence_study(const GridScene& grid, const SceneConfig& smooth_scene,
                                   const Vec& start, const Vec& dir,
                                   const std::vector<int>& resolutions, int stop_axis,
                                   double stop_value) {
    if (resolutions.size() < 3)
        throw InvalidInputError("convergence_study: need at least 3 resolutions");

    // Smooth reference endpoint on the stopping plane.
    SceneConfig ref_scene = smooth_scene;
    ref_scene.interface_spec = InterfaceSpec::plane(Vec::Unit(start.size(), stop_axis), stop_value);
    Trajectory ref = trace(ref_scene, start, dir, 0);
    if (ref.segments.empty() || ref.segments.back().stop_reason != StopReason::InterfaceHit)
        throw InvalidInputError("convergence_study: smooth trace never reaches the stopping plane");
    const Vec ref_end = ref.terminal().x;

    ConvergenceTable table;
    std::vector<double> logh, loge;
    for (int r : resolutions) {
        GridScene g = grid;
        g.resolution.assign(start.size(), r);
        Trajectory traj = trace_discretized(g, start, dir, 1000000, smooth_scene.tol, stop_axis,
                                            stop_value);
        if (traj.status != TraceStatus::ReceiverHit)
            throw InvalidInputError("convergence_study: discretized trace missed the stop plane");
        const double err = (traj.terminal().x - ref_end).norm();
        table.rows.push_back({r, err});
        if (err > 0.0) {
            logh.push_back(std::log2(1.0 / r));
            loge.push_back(std::log2(err));
        }
    }
    table.fitted_order = logh.size() >= 2 ? fit_slope(logh, loge) : 0.0;
    return table;
}

}  // namespace lfray
