#include "qnet/effects.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "qnet/error.hpp"
#include "qnet/observables.hpp"

namespace qnet {

const char* to_string(Effect effect) {
    switch (effect) {
        case Effect::congestion_valley: return "congestion_valley";
        case Effect::staircase: return "staircase";
        case Effect::asymptotic_unitarity: return "asymptotic_unitarity";
    }
    return "unknown";
}

namespace {

void require_same_length(std::size_t a, std::size_t b, const char* what) {
    if (a != b) throw ValidationError(std::string(what) + ": series lengths differ");
}

/// Vertex time of the parabola through three samples.
double parabolic_vertex(double t0, double t1, double t2, double y0, double y1, double y2) {
    const double d1 = (y1 - y0) / (t1 - t0);
    const double d2 = (y2 - y1) / (t2 - t1);
    const double a = (d2 - d1) / (t2 - t0);
    if (a == 0.0) return t1;
    const double b = d1 - a * (t0 + t1);
    const double v = -b / (2.0 * a);
    return std::clamp(v, t0, t2);
}

/// Interpolated times of interior extrema inside [lo, hi) whose |value| reaches floor.
std::vector<double> extremum_times(const std::vector<double>& t, const std::vector<double>& y, std::size_t lo,
                                   std::size_t hi, double floor) {
    std::vector<double> out;
    // Walk over nonzero differences only, so flat runs do not split an extremum.
    std::size_t prev = lo;
    for (std::size_t i = lo + 1; i + 1 < hi; ++i) {
        const double left = y[i] - y[prev];
        const double right = y[i + 1] - y[i];
        if (right == 0.0) continue;
        if (left * right < 0.0 && std::abs(y[i]) >= floor)
            out.push_back(parabolic_vertex(t[i - 1], t[i], t[i + 1], y[i - 1], y[i], y[i + 1]));
        prev = i;
    }
    return out;
}

std::vector<double> spacings(const std::vector<double>& e) {
    std::vector<double> s;
    for (std::size_t i = 1; i < e.size(); ++i) s.push_back(e[i] - e[i - 1]);
    return s;
}

double mean(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size()); }

}  // namespace

FrequencyEstimate dominant_frequency(const std::vector<double>& times, const std::vector<double>& values) {
    require_same_length(times.size(), values.size(), "dominant frequency");
    const std::size_t n = times.size();
    if (n < 5) throw ValidationError("dominant frequency: too few samples");

    // First guess of the half period from the raw signal, or from its slope
    // when the signal climbs monotonically in steps.
    auto guess = extremum_times(times, values, 0, n, 0.0);
    if (guess.size() < 3) {
        std::vector<double> slope(n - 1), mid(n - 1);
        for (std::size_t i = 0; i + 1 < n; ++i) {
            slope[i] = (values[i + 1] - values[i]) / (times[i + 1] - times[i]);
            mid[i] = 0.5 * (times[i] + times[i + 1]);
        }
        guess = extremum_times(mid, slope, 0, n - 1, 0.0);
    }
    if (guess.size() < 3) throw ValidationError("no oscillation: fewer than 3 extrema");
    double half = mean(spacings(guess));

    std::vector<double> extrema;
    for (int iter = 0; iter < 3; ++iter) {
        // Moving average over one full period removes the trend.
        std::vector<double> prefix(n + 1, 0.0);
        for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + values[i];
        std::vector<double> resid(n, 0.0);
        std::size_t lo = n, hi = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (times[i] - half < times.front() || times[i] + half > times.back()) continue;
            const auto a = static_cast<std::size_t>(std::lower_bound(times.begin(), times.end(), times[i] - half) - times.begin());
            const auto b = static_cast<std::size_t>(std::upper_bound(times.begin(), times.end(), times[i] + half) - times.begin());
            resid[i] = values[i] - (prefix[b] - prefix[a]) / static_cast<double>(b - a);
            lo = std::min(lo, i);
            hi = std::max(hi, i + 1);
        }
        if (hi <= lo + 3) throw ValidationError("no oscillation: series shorter than two periods");
        double peak = 0.0;
        for (std::size_t i = lo; i < hi; ++i) peak = std::max(peak, std::abs(resid[i]));
        extrema = extremum_times(times, resid, lo, hi, 1e-3 * peak);
        if (extrema.size() < 3) throw ValidationError("no oscillation: fewer than 3 extrema after detrending");
        half = mean(spacings(extrema));
    }
    const auto s = spacings(extrema);
    double var = 0.0;
    for (double x : s) var += (x - half) * (x - half);
    const double sd = s.size() > 1 ? std::sqrt(var / static_cast<double>(s.size() - 1)) : 0.0;
    return {M_PI / half, sd / (half * std::sqrt(static_cast<double>(s.size()))), extrema.size()};
}

FrequencyEstimate dominant_frequency(const Trajectory& trajectory, const std::string& site) {
    return dominant_frequency(trajectory.times, trajectory.population(site));
}

EffectReport detect_congestion_valley(const std::vector<double>& parameters, const std::vector<double>& values) {
    require_same_length(parameters.size(), values.size(), "congestion valley");
    if (parameters.size() < 5) throw ValidationError("congestion valley needs at least 5 points");
    for (std::size_t i = 1; i < parameters.size(); ++i)
        if (!(parameters[i] > parameters[i - 1]))
            throw ValidationError("congestion valley needs strictly ascending parameters");

    EffectReport report;
    report.effect = Effect::congestion_valley;
    const std::size_t n = values.size();
    std::vector<double> left_max(n), right_max(n);
    left_max[0] = values[0];
    for (std::size_t i = 1; i < n; ++i) left_max[i] = std::max(left_max[i - 1], values[i]);
    right_max[n - 1] = values[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) right_max[i] = std::max(right_max[i + 1], values[i]);

    std::size_t best = n;
    double depth = 0.0;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double d = std::min(left_max[i - 1], right_max[i + 1]) - values[i];
        if (d > thresholds::kCongestionNoiseFloor && (best == n || values[i] < values[best])) {
            best = i;
            depth = d;
        }
    }
    std::ostringstream diag;
    diag.precision(6);
    if (best == n) {
        diag << "no interior minimum deeper than " << thresholds::kCongestionNoiseFloor << " on both sides";
        report.diagnostics = diag.str();
        return report;
    }
    report.detected = true;
    const double tail_hi = *std::max_element(values.end() - 3, values.end());
    const double tail_lo = *std::min_element(values.end() - 3, values.end());
    report.numbers = {{"argmin", parameters[best]},
                      {"min_value", values[best]},
                      {"depth", depth},
                      {"plateau_value", values.back()},
                      {"plateau_spread", tail_hi - tail_lo}};
    diag << "interior minimum " << values[best] << " at " << parameters[best] << ", depth " << depth;
    report.diagnostics = diag.str();
    return report;
}

EffectReport staircase_steps(const std::vector<double>& times, const std::vector<double>& x,
                             const std::vector<double>& y) {
    require_same_length(times.size(), x.size(), "staircase");
    require_same_length(times.size(), y.size(), "staircase");
    const std::size_t n = times.size();
    if (n < 10) throw ValidationError("staircase detection needs at least 10 samples");

    EffectReport report;
    report.effect = Effect::staircase;
    std::vector<double> vx(n - 1), vy(n - 1);
    double peak = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        vx[i] = x[i + 1] - x[i];
        vy[i] = y[i + 1] - y[i];
        peak = std::max(peak, std::hypot(vx[i], vy[i]));
    }
    if (peak == 0.0) {
        report.diagnostics = "curve does not move";
        return report;
    }

    struct Run {
        bool along_x;
        std::size_t begin, end;  // interval indices [begin, end)
        double core_fraction;
        double minor_ratio;
    };
    std::vector<Run> runs;
    const double still = thresholds::kStaircaseStationarySpeed * peak;
    std::size_t i = 0;
    while (i + 1 < n) {
        if (std::hypot(vx[i], vy[i]) < still) {
            ++i;
            continue;
        }
        const bool along_x = std::abs(vx[i]) >= std::abs(vy[i]);
        std::size_t j = i;
        double major = 0.0, minor = 0.0, core = 0.0;
        while (j + 1 < n && std::hypot(vx[j], vy[j]) >= still && (std::abs(vx[j]) >= std::abs(vy[j])) == along_x) {
            const double a = along_x ? std::abs(vx[j]) : std::abs(vy[j]);
            const double b = along_x ? std::abs(vy[j]) : std::abs(vx[j]);
            major += a;
            minor += b;
            if (b <= thresholds::kStaircaseSlopeRatio * a) core += a;
            ++j;
        }
        runs.push_back({along_x, i, j, core / major, minor / major});
        i = j;
    }

    // Qualifying runs are flat over a substantial part of their length.
    auto qualifies = [](const Run& r) { return r.core_fraction >= thresholds::kStaircaseCoreFraction; };
    int alternations = 0;
    for (std::size_t k = 1; k < runs.size(); ++k)
        if (qualifies(runs[k]) && qualifies(runs[k - 1]) && runs[k].along_x != runs[k - 1].along_x &&
            runs[k].begin == runs[k - 1].end)
            ++alternations;

    std::vector<double> durations;
    std::vector<std::pair<double, double>> steps;
    double initial = 0.0, worst_minor = 0.0;
    for (const auto& r : runs) {
        if (!qualifies(r)) continue;
        const double t0 = times[r.begin], t1 = times[r.end];
        if (r.begin == 0) {
            initial = t1 - t0;
            continue;
        }
        durations.push_back(t1 - t0);
        steps.emplace_back(t0, t1);
        worst_minor = std::max(worst_minor, r.minor_ratio);
    }

    std::ostringstream diag;
    diag.precision(6);
    diag << runs.size() << " dominant-direction runs, " << alternations << " alternations between flat runs";
    if (alternations < thresholds::kStaircaseMinAlternations || durations.empty()) {
        report.diagnostics = diag.str();
        return report;
    }
    report.detected = true;
    const double mean_step = mean(durations);
    report.intervals = steps;
    report.numbers = {{"alternations", alternations},
                      {"steps", static_cast<double>(durations.size())},
                      {"mean_step", mean_step},
                      {"t0_estimate", mean_step},
                      {"initial_run", initial},
                      {"max_minor_ratio", worst_minor}};
    diag << "; mean step " << mean_step << " over " << durations.size() << " steps";
    report.diagnostics = diag.str();
    return report;
}

EffectReport detect_asymptotic_unitarity(const std::vector<double>& times, const std::vector<double>& distance,
                                         const std::vector<double>& coherence_modulus) {
    require_same_length(times.size(), distance.size(), "asymptotic unitarity");
    if (times.size() < 3) throw ValidationError("asymptotic unitarity needs at least 3 samples");
    if (!coherence_modulus.empty()) require_same_length(times.size(), coherence_modulus.size(), "asymptotic unitarity");

    EffectReport report;
    report.effect = Effect::asymptotic_unitarity;
    std::ostringstream diag;
    diag.precision(6);
    const double first = distance.front(), last = distance.back();
    diag << "distance " << first << " -> " << last;
    if (!(first > 0.0) || last > thresholds::kUnitarityDecayFactor * first) {
        diag << "; decay factor above " << thresholds::kUnitarityDecayFactor;
        report.diagnostics = diag.str();
        return report;
    }
    report.detected = true;
    const auto fit = fit_exponential_decay(times, distance, 1e-10 * first);
    report.numbers = {{"decay_rate", fit.rate}, {"fit_log_rms", fit.log_rms}, {"final_distance", last}};
    diag << "; fitted rate " << fit.rate;
    if (!coherence_modulus.empty()) {
        const std::size_t from = coherence_modulus.size() - std::max<std::size_t>(1, coherence_modulus.size() / 10);
        const auto [lo, hi] = std::minmax_element(coherence_modulus.begin() + static_cast<std::ptrdiff_t>(from),
                                                  coherence_modulus.end());
        std::vector<double> tail(coherence_modulus.begin() + static_cast<std::ptrdiff_t>(from), coherence_modulus.end());
        report.numbers["circle_radius"] = mean(tail);
        report.numbers["circle_spread"] = *hi - *lo;
        diag << "; late coherence modulus " << mean(tail);
    }
    report.diagnostics = diag.str();
    return report;
}

}  // namespace qnet
