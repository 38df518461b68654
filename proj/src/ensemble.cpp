#include "srsim/ensemble.hpp"

#include "srsim/coupling.hpp"
#include "srsim/rng.hpp"
#include "srsim/version.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace srsim {

std::vector<double> make_time_grid(double t_min, double t_split, double t_max,
                                   int n_geometric, int n_linear) {
    if (!(0.0 < t_min && t_min < t_split && t_split <= t_max))
        throw std::invalid_argument("make_time_grid: need 0 < t_min < t_split <= t_max");
    std::vector<double> grid;
    grid.push_back(0.0);
    const double ratio = std::pow(t_split / t_min, 1.0 / std::max(1, n_geometric - 1));
    for (int k = 0; k < n_geometric; ++k)
        grid.push_back(t_min * std::pow(ratio, k));
    const double step = (t_max - t_split) / std::max(1, n_linear);
    for (int k = 1; k <= n_linear; ++k)
        grid.push_back(t_split + step * k);
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    return grid;
}

long long EnsembleSpec::resolved_n_atoms() const {
    return n_atoms >= 0 ? n_atoms : expected_atom_number(geometry);
}

void EnsembleSpec::validate() const {
    geometry.validate();
    pulse.validate();
    if (n_configs < 1)
        throw std::invalid_argument("ensemble spec: n_configs must be >= 1");
    const long long n = resolved_n_atoms();
    if (n < 1)
        throw std::invalid_argument("ensemble spec: cloud resolves to zero atoms");
    if (3 * n > 6000)
        throw std::invalid_argument(
            "ensemble spec: 3N exceeds the dense-solver cap of 6000");
    if (thetas.empty() || polarizations.empty() || times.empty())
        throw std::invalid_argument("ensemble spec: empty theta/polarization/time grid");
    for (double t : times)
        if (t < 0.0)
            throw std::invalid_argument("ensemble spec: negative observation time");
    for (double th : thetas)
        if (!(th >= 0.0 && th <= 3.14159265358979323846 + 1e-12))
            throw std::invalid_argument("ensemble spec: theta outside [0, pi]");
    if (drive.type == Drive::Type::coherent) {
        if (std::abs(drive.direction.norm() - 1.0) > 1e-12)
            throw std::invalid_argument("ensemble spec: drive direction must be unit");
    }
}

std::size_t EnsembleResult::obs_index(std::size_t theta_idx, std::size_t pol_idx,
                                      std::size_t time_idx) const {
    const std::size_t n_pol = spec.polarizations.size();
    const std::size_t n_t = spec.times.size();
    return (theta_idx * n_pol + pol_idx) * n_t + time_idx;
}

FluorescenceSeries EnsembleResult::series(std::size_t theta_idx,
                                          std::size_t pol_idx) const {
    FluorescenceSeries s;
    s.times = spec.times;
    s.n_configs = n_configs - n_rejected;
    s.n_rejected = n_rejected;
    const std::size_t n_t = spec.times.size();
    s.mean_intensity.resize(n_t);
    s.stderr_intensity.resize(n_t);
    for (std::size_t k = 0; k < n_t; ++k) {
        s.mean_intensity[k] = mean[obs_index(theta_idx, pol_idx, k)];
        s.stderr_intensity[k] = stderr_[obs_index(theta_idx, pol_idx, k)];
    }
    return s;
}

EnsembleResult::WindowRate EnsembleResult::window_rate(std::size_t theta_idx,
                                                       std::size_t pol_idx, double t1,
                                                       double t2) const {
    auto locate = [&](double t) -> std::size_t {
        for (std::size_t k = 0; k < spec.times.size(); ++k)
            if (std::abs(spec.times[k] - t) <= 1e-12 * std::max(1.0, std::abs(t)))
                return k;
        throw std::domain_error("window_rate: endpoint not on the time grid");
    };
    const std::size_t k1 = locate(t1), k2 = locate(t2);
    const double i1 = mean[obs_index(theta_idx, pol_idx, k1)];
    const double i2 = mean[obs_index(theta_idx, pol_idx, k2)];

    WindowRate rate;
    rate.gamma = decay_rate_from_means(i1, i2, t1, t2);

    const std::size_t n_t = spec.times.size();
    const auto& cov = covariance[theta_idx * spec.polarizations.size() + pol_idx];
    const double v1 = cov[k1 * n_t + k1];
    const double v2 = cov[k2 * n_t + k2];
    const double c12 = cov[k1 * n_t + k2];
    const double var_log =
        v1 / (i1 * i1) + v2 / (i2 * i2) - 2.0 * c12 / (i1 * i2);
    rate.gamma_stderr = std::sqrt(std::max(0.0, var_log)) / (t2 - t1);

    const double rel1 = std::sqrt(v1) / i1;
    const double rel2 = std::sqrt(v2) / i2;
    rate.reliable = (rel1 <= 0.5 && rel2 <= 0.5);
    return rate;
}

namespace {

/// Per-configuration pipeline: positions -> Hamiltonian -> modes -> intensity
/// for every (theta, polarization, time) observable. Definite helicity
/// channels are computed once; "total" rows reuse their sum.
std::vector<double> observe_configuration(const EnsembleSpec& spec,
                                          std::uint64_t config_seed) {
    const int n_atoms = static_cast<int>(spec.resolved_n_atoms());
    const AtomConfiguration config = sample_cloud(spec.geometry, n_atoms, config_seed);
    const EffectiveHamiltonian h = build_hamiltonian(config);
    const SpectralDecomposition dec = decompose(h, config_seed);

    const std::size_t n_theta = spec.thetas.size();
    const std::size_t n_pol = spec.polarizations.size();
    const std::size_t n_t = spec.times.size();
    std::vector<double> out(n_theta * n_pol * n_t, 0.0);

    for (std::size_t a = 0; a < n_theta; ++a) {
        std::vector<double> preserving, nonpreserving;
        auto channel_intensity = [&](Polarization pol) -> const std::vector<double>& {
            auto& slot =
                (pol == Polarization::helicity_preserving) ? preserving : nonpreserving;
            if (slot.empty()) {
                DetectionChannel ch{spec.thetas[a], spec.phi, pol};
                slot = intensity_timeseries(config, dec, spec.pulse, spec.drive, ch,
                                            spec.times);
            }
            return slot;
        };
        for (std::size_t p = 0; p < n_pol; ++p) {
            const std::size_t base = (a * n_pol + p) * n_t;
            if (spec.polarizations[p] == Polarization::total) {
                const auto& par = channel_intensity(Polarization::helicity_preserving);
                const auto& perp = channel_intensity(Polarization::helicity_nonpreserving);
                for (std::size_t k = 0; k < n_t; ++k)
                    out[base + k] = par[k] + perp[k];
            } else {
                const auto& one = channel_intensity(spec.polarizations[p]);
                for (std::size_t k = 0; k < n_t; ++k)
                    out[base + k] = one[k];
            }
        }
    }
    return out;
}

struct ConfigOutcome {
    std::vector<double> observables;
    bool rejected = false;
    std::uint64_t seed = 0;
};

} // namespace

EnsembleResult run_ensemble(const EnsembleSpec& spec, int workers) {
    spec.validate();
    const auto t_start = std::chrono::steady_clock::now();
    workers = std::max(1, workers);

    const std::size_t n_theta = spec.thetas.size();
    const std::size_t n_pol = spec.polarizations.size();
    const std::size_t n_t = spec.times.size();
    const std::size_t n_obs = n_theta * n_pol * n_t;

    EnsembleResult result;
    result.spec = spec;
    result.code_version = version;
    result.n_configs = spec.n_configs;
    if (spec.keep_per_config)
        result.per_config.emplace();

    // accumulated in strict configuration order for bit-stable reduction
    std::vector<double> sum(n_obs, 0.0), sum_sq(n_obs, 0.0);
    std::vector<std::vector<double>> sum_pair(n_theta * n_pol,
                                              std::vector<double>(n_t * n_t, 0.0));

    const int chunk = std::max(1, std::min(256, spec.n_configs));
    std::vector<ConfigOutcome> block(static_cast<std::size_t>(chunk));
    std::exception_ptr failure = nullptr;
    std::mutex failure_mutex;

    for (int start = 0; start < spec.n_configs; start += chunk) {
        const int count = std::min(chunk, spec.n_configs - start);
        std::atomic<int> cursor{0};
        auto worker_fn = [&]() {
            for (;;) {
                const int local = cursor.fetch_add(1);
                if (local >= count)
                    return;
                ConfigOutcome& slot = block[static_cast<std::size_t>(local)];
                slot.seed = derive_seed(spec.master_seed,
                                        static_cast<std::uint64_t>(start + local));
                slot.rejected = false;
                try {
                    slot.observables = observe_configuration(spec, slot.seed);
                } catch (const DecompositionError&) {
                    slot.rejected = true;
                } catch (...) {
                    std::lock_guard<std::mutex> lock(failure_mutex);
                    if (!failure)
                        failure = std::current_exception();
                    slot.rejected = true;
                }
            }
        };
        if (workers == 1) {
            worker_fn();
        } else {
            std::vector<std::thread> pool;
            for (int w = 0; w < workers; ++w)
                pool.emplace_back(worker_fn);
            for (auto& th : pool)
                th.join();
        }
        if (failure)
            std::rethrow_exception(failure);

        for (int local = 0; local < count; ++local) {
            ConfigOutcome& slot = block[static_cast<std::size_t>(local)];
            if (slot.rejected) {
                ++result.n_rejected;
                result.rejected_seeds.push_back(slot.seed);
                continue;
            }
            const std::vector<double>& obs = slot.observables;
            for (std::size_t k = 0; k < n_obs; ++k) {
                sum[k] += obs[k];
                sum_sq[k] += obs[k] * obs[k];
            }
            for (std::size_t c = 0; c < n_theta * n_pol; ++c) {
                auto& pair = sum_pair[c];
                const std::size_t base = c * n_t;
                for (std::size_t ta = 0; ta < n_t; ++ta)
                    for (std::size_t tb = ta + 1; tb < n_t; ++tb)
                        pair[ta * n_t + tb] += obs[base + ta] * obs[base + tb];
            }
            if (result.per_config)
                result.per_config->push_back(obs);
        }
    }

    const long n_used = spec.n_configs - result.n_rejected;
    if (n_used == 0)
        throw std::runtime_error("run_ensemble: every configuration was rejected");
    result.rejection_flagged =
        result.n_rejected * 20 >= spec.n_configs; // >= 5%

    result.mean.resize(n_obs);
    result.stderr_.resize(n_obs);
    for (std::size_t k = 0; k < n_obs; ++k) {
        const double mean = sum[k] / static_cast<double>(n_used);
        result.mean[k] = mean;
        if (n_used > 1) {
            const double var =
                std::max(0.0, (sum_sq[k] - n_used * mean * mean) / (n_used - 1.0));
            result.stderr_[k] = std::sqrt(var / static_cast<double>(n_used));
        } else {
            result.stderr_[k] = 0.0;
        }
    }

    // covariance of the means: Cov(I_a, I_b) / n
    result.covariance.assign(n_theta * n_pol, std::vector<double>(n_t * n_t, 0.0));
    for (std::size_t c = 0; c < n_theta * n_pol; ++c) {
        auto& cov = result.covariance[c];
        const auto& pair = sum_pair[c];
        const std::size_t base = c * n_t;
        for (std::size_t ta = 0; ta < n_t; ++ta) {
            for (std::size_t tb = ta; tb < n_t; ++tb) {
                double value = 0.0;
                if (n_used > 1) {
                    const double cross = (ta == tb) ? sum_sq[base + ta] : pair[ta * n_t + tb];
                    const double cov_ab = (cross - sum[base + ta] * sum[base + tb] /
                                                       static_cast<double>(n_used)) /
                                          (n_used - 1.0);
                    value = cov_ab / static_cast<double>(n_used);
                }
                cov[ta * n_t + tb] = value;
                cov[tb * n_t + ta] = value;
            }
        }
    }

    result.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return result;
}

DecayRateCurve angular_rate_curve(const EnsembleResult& result, std::size_t pol_idx,
                                  double t1, double t2) {
    DecayRateCurve curve;
    curve.window_t1 = t1;
    curve.window_t2 = t2;
    for (std::size_t a = 0; a < result.spec.thetas.size(); ++a) {
        const auto rate = result.window_rate(a, pol_idx, t1, t2);
        curve.abscissa.push_back(result.spec.thetas[a]);
        curve.gamma.push_back(rate.gamma);
        curve.reliable.push_back(rate.reliable);
    }
    return curve;
}

OverlayTable compare_to_randomwalk(const EnsembleResult& result,
                                   const RandomWalkModel& model, double t1, double t2,
                                   std::size_t pol_idx, double guard_factor) {
    const CloudGeometry& a = result.spec.geometry;
    const CloudGeometry& b = model.geometry;
    const bool same = a.peak_density == b.peak_density &&
                      a.transverse_radius == b.transverse_radius &&
                      a.longitudinal_radius == b.longitudinal_radius;
    if (!same)
        throw std::invalid_argument(
            "compare_to_randomwalk: ensemble and model geometries differ");

    OverlayTable table;
    table.window_t1 = t1;
    table.window_t2 = t2;
    bool any_sideward = false;
    for (std::size_t k = 0; k < result.spec.thetas.size(); ++k) {
        OverlayRow row;
        row.theta = result.spec.thetas[k];
        row.gamma_microscopic = result.window_rate(k, pol_idx, t1, t2).gamma;
        row.gamma_analytic = decay_rate_analytic(model, row.theta);
        row.relative_deviation =
            (row.gamma_microscopic - row.gamma_analytic) / row.gamma_analytic;
        row.in_coherent_zone = in_coherent_zone(model, row.theta, guard_factor);
        if (!row.in_coherent_zone) {
            any_sideward = true;
            table.max_sideward_deviation = std::max(table.max_sideward_deviation,
                                                    std::abs(row.relative_deviation));
        }
        table.rows.push_back(row);
    }
    if (!any_sideward)
        throw std::invalid_argument(
            "compare_to_randomwalk: every angle lies inside the coherent zones");
    return table;
}

}
