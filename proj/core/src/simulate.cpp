#include "nrpp/simulate.hpp"

#include "nrpp/errors.hpp"
#include "nrpp/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace nrpp {

std::size_t Sample::total_events() const noexcept {
    std::size_t total = 0;
    for (const Trajectory& tr : trajectories) {
        total += tr.events.size();
    }
    return total;
}

std::vector<double> Sample::pooled_events() const {
    std::vector<double> all;
    all.reserve(total_events());
    for (const Trajectory& tr : trajectories) {
        all.insert(all.end(), tr.events.begin(), tr.events.end());
    }
    std::sort(all.begin(), all.end());
    return all;
}

Sample Sample::slice(std::size_t first, std::size_t last) const {
    if (first > last || last > trajectories.size()) {
        fail(ErrorKind::domain, "sample slice out of range");
    }
    Sample out;
    out.horizon = horizon;
    out.trajectories.assign(trajectories.begin() + static_cast<std::ptrdiff_t>(first),
                            trajectories.begin() + static_cast<std::ptrdiff_t>(last));
    return out;
}

Trajectory simulate_trajectory(const TrueIntensity& intensity, const RngStream& stream, std::optional<double> bound) {
    const double rate = bound.value_or(intensity.lambda_max());
    if (bound && *bound < intensity.lambda_max()) {
        fail(ErrorKind::configuration, "thinning bound below the certified lambda_max");
    }
    Trajectory out;
    if (!(rate > 0.0)) {
        return out;
    }
    const double tau = intensity.horizon();
    CounterEngine engine(stream);
    double t = engine.exponential(rate);
    while (t <= tau) {
        const double lam = intensity.value(t);
        if (lam > rate * (1.0 + 1e-12)) {
            fail(ErrorKind::configuration, "intensity exceeds the thinning bound at t = " + std::to_string(t));
        }
        if (engine.uniform() * rate < lam) {
            if (out.events.empty() || t > out.events.back()) {
                out.events.push_back(t);
            }
        }
        t += engine.exponential(rate);
    }
    return out;
}

Trajectory simulate_trajectory(const ModelPtr& model, double theta, const RngStream& stream) {
    return simulate_trajectory(TrueIntensity(model, theta), stream);
}

Sample simulate_sample(const TrueIntensity& intensity, int n, const RngStream& base, int workers) {
    if (n <= 0) {
        fail(ErrorKind::domain, "sample size must be positive, got " + std::to_string(n));
    }
    Sample sample;
    sample.horizon = intensity.horizon();
    sample.trajectories.resize(static_cast<std::size_t>(n));
    parallel_for(static_cast<std::size_t>(n), workers, [&](std::size_t j) {
        sample.trajectories[j] = simulate_trajectory(intensity, base.offset(j));
    });
    return sample;
}

Sample slice_periodic(const Trajectory& long_trajectory, double horizon, double tau) {
    if (!(tau > 0.0) || !(horizon > 0.0)) {
        fail(ErrorKind::domain, "horizon and period must be positive");
    }
    const double ratio = horizon / tau;
    const double pieces = std::round(ratio);
    if (pieces < 1.0 || std::abs(ratio - pieces) > 1e-9 * std::max(1.0, ratio)) {
        fail(ErrorKind::domain, "horizon is not an integer multiple of tau");
    }
    const auto n = static_cast<std::size_t>(pieces);
    Sample out;
    out.horizon = tau;
    out.trajectories.resize(n);
    for (double t : long_trajectory.events) {
        auto j = static_cast<std::size_t>(std::floor(t / tau));
        j = std::min(j, n - 1);
        const double local = std::clamp(t - static_cast<double>(j) * tau, 0.0, tau);
        out.trajectories[j].events.push_back(local);
    }
    return out;
}

void write_events_csv(std::ostream& out, const Sample& sample) {
    out << "trajectory_index,event_time\n";
    char buffer[64];
    for (std::size_t j = 0; j < sample.trajectories.size(); ++j) {
        for (double t : sample.trajectories[j].events) {
            std::snprintf(buffer, sizeof buffer, "%zu,%.17g\n", j, t);
            out << buffer;
        }
    }
}

Sample read_events_csv(std::istream& in, double horizon, std::optional<std::size_t> n) {
    Sample sample;
    sample.horizon = horizon;
    std::string line;
    if (!std::getline(in, line) || line.rfind("trajectory_index,event_time", 0) != 0) {
        fail(ErrorKind::configuration, "event CSV must start with the header trajectory_index,event_time");
    }
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) {
            continue;
        }
        const auto comma = line.find(',');
        if (comma == std::string::npos) {
            fail(ErrorKind::configuration, "malformed event CSV row " + std::to_string(row));
        }
        std::size_t index = 0;
        double t = 0.0;
        try {
            index = std::stoul(line.substr(0, comma));
            t = std::stod(line.substr(comma + 1));
        } catch (const std::exception&) {
            fail(ErrorKind::configuration, "malformed event CSV row " + std::to_string(row));
        }
        if (index >= sample.trajectories.size()) {
            sample.trajectories.resize(index + 1);
        }
        auto& events = sample.trajectories[index].events;
        if (t < 0.0 || t > horizon || (!events.empty() && !(t > events.back()))) {
            fail(ErrorKind::configuration, "event CSV row " + std::to_string(row) + " breaks ordering or horizon");
        }
        events.push_back(t);
    }
    if (n) {
        if (*n < sample.trajectories.size()) {
            fail(ErrorKind::configuration, "event CSV has more trajectories than declared");
        }
        sample.trajectories.resize(*n);
    }
    return sample;
}

} // namespace nrpp
