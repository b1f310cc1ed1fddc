#pragma once

#include "nrpp/intensity.hpp"
#include "nrpp/rng.hpp"

#include <iosfwd>
#include <optional>
#include <vector>

namespace nrpp {

/// Strictly increasing event times of one trajectory on [0, tau].
struct Trajectory {
    std::vector<double> events;
};

/// n independent trajectories sharing one horizon.
struct Sample {
    std::vector<Trajectory> trajectories;
    double horizon{1.0};

    [[nodiscard]] std::size_t size() const noexcept { return trajectories.size(); }
    [[nodiscard]] std::size_t total_events() const noexcept;
    /// All events of all trajectories, merged and sorted.
    [[nodiscard]] std::vector<double> pooled_events() const;
    /// Trajectories [first, last) as a new sample.
    [[nodiscard]] Sample slice(std::size_t first, std::size_t last) const;
};

/// Thinning of a homogeneous process at rate `bound` (default: the certified
/// lambda_max of the intensity).
[[nodiscard]] Trajectory simulate_trajectory(const TrueIntensity& intensity, const RngStream& stream,
                                             std::optional<double> bound = std::nullopt);
[[nodiscard]] Trajectory simulate_trajectory(const ModelPtr& model, double theta, const RngStream& stream);

/// Trajectory j is drawn from stream base.stream_index + j, so the sample is
/// identical for any worker count.
[[nodiscard]] Sample simulate_sample(const TrueIntensity& intensity, int n, const RngStream& base, int workers = 1);

/// Cuts a trajectory observed on [0, horizon] into horizon / tau pieces of length tau.
[[nodiscard]] Sample slice_periodic(const Trajectory& long_trajectory, double horizon, double tau);

/// CSV with header `trajectory_index,event_time`, one row per event.
void write_events_csv(std::ostream& out, const Sample& sample);
/// Reads the CSV written above; trajectories without events are recovered
/// only up to the largest index present unless `n` is given.
[[nodiscard]] Sample read_events_csv(std::istream& in, double horizon, std::optional<std::size_t> n = std::nullopt);

} // namespace nrpp
