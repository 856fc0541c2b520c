#pragma once

#include "lfray/scene.hpp"
#include "lfray/snell.hpp"

namespace lfray {

struct TraceEvent {
    CrossingEvent crossing;
    std::optional<SnellOutcome> refraction;
    std::optional<SnellOutcome> reflection;
    int chosen_branch = -1;  // index into the chosen outcome's directions
    bool chose_reflection = false;
    bool total_reflection = false;
    int from_medium = 1;
    int to_medium = 2;

    const SnellOutcome& chosen_outcome() const { return chose_reflection ? *reflection : *refraction; }
    const SnellDirection& chosen_direction() const {
        return chosen_outcome().directions.at(chosen_branch);
    }
};

enum class TraceStatus { ReceiverHit, BoundsExit, MaxEvents, MaxSteps, Unresolvable };

const char* to_string(TraceStatus s);

struct Trajectory {
    std::vector<Segment> segments;
    std::vector<TraceEvent> events;
    std::optional<double> arrival;
    TraceStatus status = TraceStatus::MaxSteps;

    const GeodesicState& terminal() const { return segments.back().samples.back(); }
};

// End-to-end tracing: integrate, resolve interface events per the branch
// policy, repeat until the receiver, the chart boundary, the event budget or
// an unresolvable case stops the ray.
Trajectory trace(const SceneConfig& scene, const Vec& start, const Vec& dir, int max_events = -1);

// Branch-enumerating variant: forks on every usable direction of each event.
std::vector<Trajectory> trace_all(const SceneConfig& scene, const Vec& start, const Vec& dir,
                                  int max_events = -1, int max_branches = 32);

// Receiver-parameter value at the trajectory terminal point. Throws
// NoArrivalError when the terminal point is off the receiver.
double arrival_time(const Trajectory& traj, const ReceiverSpec& receiver,
                    const Tolerances& tol = {});

struct CriticalityReport {
    enum class Signature { Minimum, Saddle, Maximum, Flat };
    double gradient_norm = 0.0;  // normalized first-difference estimate
    bool critical = false;
    Signature signature = Signature::Flat;
    bool not_minimizing = false;  // a faster two-segment timelike connector exists
    bool inconclusive = false;
};

// Shooting-based first-order criticality check of the arrival time at the
// last interface event, using constant-approximation media on a local patch.
CriticalityReport fermat_criticality_check(const SceneConfig& scene, const Trajectory& traj,
                                           double probe_offset = 0.0);

// Max orthogonality defect of the launch velocity against the source tangent
// basis; zero (vacuously) for point sources.
double source_orthogonality_check(const SceneConfig& scene, const Trajectory& traj);

struct FermatOracleResult {
    Vec crossing;
    double time = 0.0;
    Vec launch_dir;
};

// Brute-force arrival-time minimization over interface crossing points for
// constant-coefficient media and a planar interface: sweep launch directions
// on a grid, connect the second leg to the receiver curve exactly, refine the
// grid around the best cell.
FermatOracleResult fermat_oracle(const Metric& m1, const Metric& m2, const InterfaceSpec& eta,
                                 const Vec& source, const ReceiverSpec& receiver, int grid = 64,
                                 int rounds = 3);

// Search two-segment connectors through interface points near p for strict
// timelikeness of both legs in the constant-metric local model; existence is
// equivalent to the broken trajectory being reversely oriented.
bool timelike_connector_found(const Metric& m_in, const Metric& m_out, const InterfaceSpec& eta,
                              const Vec& p, const Vec& q_before, const Vec& q_after,
                              int grid_per_axis = 200, double radius_factor = 2.0);

}  // namespace lfray
