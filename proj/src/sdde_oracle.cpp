#include "wacrisk/sdde_oracle.hpp"

#include "wacrisk/errors.hpp"
#include "wacrisk/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace wacrisk {

namespace {

constexpr std::size_t kBlock = 32;

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

struct BlockSums {
    std::vector<double> pair_mean;     // sum over paths of the path mean of y
    std::vector<double> pair_sq;       // sum over paths of the path mean of y^2
    std::vector<double> pair_sq_sq;    // sum over paths of (path mean of y^2)^2
    std::vector<double> freq_mean, freq_sq, freq_sq_sq;
    std::vector<double> timeline;      // samples x n sums of theta
    double rho = 0.0, rho_sq = 0.0;
};

// Dense row-major n x n matrix times vector.
void matvec(const std::vector<double>& A, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        const double* row = A.data() + i * n;
        for (std::size_t j = 0; j < n; ++j) s += row[j] * x[j];
        y[i] = s;
    }
}

std::vector<double> row_major(const Eigen::MatrixXd& A) {
    std::vector<double> out(static_cast<std::size_t>(A.size()));
    for (Eigen::Index i = 0; i < A.rows(); ++i) {
        for (Eigen::Index j = 0; j < A.cols(); ++j) {
            out[static_cast<std::size_t>(i * A.cols() + j)] = A(i, j);
        }
    }
    return out;
}

}  // namespace

double snap_step(double h, double tau) {
    if (!(h > 0.0)) throw ValidationError("step size must be positive");
    if (tau == 0.0) return h;
    const double ratio = tau / h;
    auto m = static_cast<long>(std::ceil(ratio - 1e-9));
    m = std::max(m, 10L);
    return tau / static_cast<double>(m);
}

std::uint64_t trajectory_seed(std::uint64_t master, std::uint64_t index) {
    return splitmix64(splitmix64(master) ^ splitmix64(index + 0x632BE59BD9B4E019ULL));
}

EnsembleStats simulate(const ModalSystem& sys, double d, double tau, const NoiseParams& noise,
                       double J, const SimConfig& cfg) {
    if (!(d > 0.0) || !(J > 0.0)) throw ValidationError("d and J must be positive");
    if (!(tau >= 0.0) || !std::isfinite(tau)) throw ValidationError("tau must be nonnegative");
    if (!(noise.eta >= 0.0) || !(noise.eta_meas >= 0.0)) {
        throw ValidationError("noise intensities must be nonnegative");
    }
    if (!(cfg.h > 0.0) || !(cfg.T > 0.0) || cfg.trajectories == 0 || !(cfg.burn_in >= 0.0) ||
        !(cfg.burn_in < 1.0) || cfg.sample_every == 0) {
        throw ValidationError("invalid simulation configuration");
    }
    const std::size_t n = sys.size();
    const auto N = static_cast<Eigen::Index>(n);
    if (cfg.theta0.size() != 0 && cfg.theta0.size() != N) throw ValidationError("theta0 has wrong length");
    if (cfg.omega0.size() != 0 && cfg.omega0.size() != N) throw ValidationError("omega0 has wrong length");

    const NetworkVerdict verdict = network_stable(sys, d, tau);
    for (std::size_t l = 1; l < verdict.modes.size(); ++l) {
        if (!verdict.modes[l].verdict.stable) {
            std::ostringstream msg;
            msg << "mode " << (l + 1) << " is unstable; stationary statistics do not exist";
            throw InfeasibleError(msg.str());
        }
    }

    const double h = snap_step(cfg.h, tau);
    const std::size_t m = tau > 0.0 ? static_cast<std::size_t>(std::llround(tau / h)) : 0;
    const auto steps = static_cast<std::size_t>(std::ceil(cfg.T / h - 1e-9));
    const auto burn = static_cast<std::size_t>(std::floor(cfg.burn_in * static_cast<double>(steps)));
    const std::size_t samples = (steps - burn) / cfg.sample_every;
    if (samples == 0) throw ValidationError("no samples after burn-in; increase T");

    const std::vector<double> L = row_major(sys.laplacian());
    const std::vector<double> M = row_major(sys.phase_gain_matrix());
    const std::vector<double> K = row_major(sys.frequency_gain_matrix());
    const Eigen::VectorXd th0 = cfg.theta0.size() ? cfg.theta0 : Eigen::VectorXd::Zero(N);
    const Eigen::VectorXd om0 = cfg.omega0.size() ? cfg.omega0 : Eigen::VectorXd::Zero(N);
    const auto pairs = enumerate_pairs(n);
    const std::size_t r = pairs.size();
    const double sqh = std::sqrt(h);
    const double load = noise.eta / J;
    const double meas = noise.eta_meas;

    const std::size_t blocks = (cfg.trajectories + kBlock - 1) / kBlock;
    std::vector<BlockSums> sums(blocks);

    parallel_for(blocks, cfg.threads, [&](std::size_t b) {
        BlockSums& s = sums[b];
        s.pair_mean.assign(r, 0.0);
        s.pair_sq.assign(r, 0.0);
        s.pair_sq_sq.assign(r, 0.0);
        s.freq_mean.assign(n, 0.0);
        s.freq_sq.assign(n, 0.0);
        s.freq_sq_sq.assign(n, 0.0);
        s.timeline.assign(samples * n, 0.0);

        const std::size_t slots = m + 1;
        std::vector<double> th_hist(slots * n), om_hist(slots * n);
        std::vector<double> lth(n), mth(n), kom(n), z1(n), z2(n), z3(n), mz(n), kz(n);
        std::vector<double> py(r), py2(r), pw(n), pw2(n);

        const std::size_t first = b * kBlock;
        const std::size_t last = std::min(cfg.trajectories, first + kBlock);
        for (std::size_t path = first; path < last; ++path) {
            std::mt19937_64 rng(trajectory_seed(cfg.seed, path));
            std::normal_distribution<double> gauss(0.0, 1.0);
            for (std::size_t i = 0; i < n; ++i) {
                th_hist[i] = th0(static_cast<Eigen::Index>(i));
                om_hist[i] = om0(static_cast<Eigen::Index>(i));
            }
            std::fill(py.begin(), py.end(), 0.0);
            std::fill(py2.begin(), py2.end(), 0.0);
            std::fill(pw.begin(), pw.end(), 0.0);
            std::fill(pw2.begin(), pw2.end(), 0.0);

            std::size_t sample = 0;
            for (std::size_t k = 0; k < steps; ++k) {
                const double* th = th_hist.data() + (k % slots) * n;
                const double* om = om_hist.data() + (k % slots) * n;
                const double* thd;
                const double* omd;
                if (k >= m) {
                    thd = th_hist.data() + ((k + 1) % slots) * n;
                    omd = om_hist.data() + ((k + 1) % slots) * n;
                    if (m == 0) {
                        thd = th;
                        omd = om;
                    }
                } else {
                    thd = th0.data();
                    omd = om0.data();
                }
                matvec(L, th, lth.data(), n);
                matvec(M, thd, mth.data(), n);
                matvec(K, omd, kom.data(), n);
                for (std::size_t i = 0; i < n; ++i) z1[i] = gauss(rng);
                if (meas > 0.0) {
                    for (std::size_t i = 0; i < n; ++i) z2[i] = gauss(rng);
                    for (std::size_t i = 0; i < n; ++i) z3[i] = gauss(rng);
                    matvec(M, z2.data(), mz.data(), n);
                    matvec(K, z3.data(), kz.data(), n);
                }
                double* th_new = th_hist.data() + ((k + 1) % slots) * n;
                double* om_new = om_hist.data() + ((k + 1) % slots) * n;
                // th/om may alias th_new/om_new only when m == 0; stage through locals.
                for (std::size_t i = 0; i < n; ++i) {
                    double dw = load * z1[i];
                    if (meas > 0.0) dw += meas * (mz[i] + kz[i]);
                    const double drift = -lth[i] - d * om[i] - mth[i] - kom[i];
                    const double w_next = om[i] + h * drift + sqh * dw;
                    const double t_next = th[i] + h * w_next;  // semi-implicit
                    th_new[i] = t_next;
                    om_new[i] = w_next;
                }

                const std::size_t kk = k + 1;
                if (kk > burn && (kk - burn) % cfg.sample_every == 0 && sample < samples) {
                    for (std::size_t p = 0; p < r; ++p) {
                        const double y = th_new[pairs[p].first - 1] - th_new[pairs[p].second - 1];
                        py[p] += y;
                        py2[p] += y * y;
                    }
                    for (std::size_t i = 0; i < n; ++i) {
                        pw[i] += om_new[i];
                        pw2[i] += om_new[i] * om_new[i];
                        s.timeline[sample * n + i] += th_new[i];
                    }
                    ++sample;
                }
            }

            const double inv = 1.0 / static_cast<double>(samples);
            for (std::size_t p = 0; p < r; ++p) {
                const double mean_sq = py2[p] * inv;
                s.pair_mean[p] += py[p] * inv;
                s.pair_sq[p] += mean_sq;
                s.pair_sq_sq[p] += mean_sq * mean_sq;
            }
            for (std::size_t i = 0; i < n; ++i) {
                const double mean_sq = pw2[i] * inv;
                s.freq_mean[i] += pw[i] * inv;
                s.freq_sq[i] += mean_sq;
                s.freq_sq_sq[i] += mean_sq * mean_sq;
            }
            const double* th_final = th_hist.data() + (steps % slots) * n;
            double avg = 0.0;
            for (std::size_t i = 0; i < n; ++i) avg += th_final[i];
            avg /= static_cast<double>(n);
            s.rho += avg;
            s.rho_sq += avg * avg;
        }
    });

    BlockSums total;
    total.pair_mean.assign(r, 0.0);
    total.pair_sq.assign(r, 0.0);
    total.pair_sq_sq.assign(r, 0.0);
    total.freq_mean.assign(n, 0.0);
    total.freq_sq.assign(n, 0.0);
    total.freq_sq_sq.assign(n, 0.0);
    total.timeline.assign(samples * n, 0.0);
    for (const auto& s : sums) {
        for (std::size_t p = 0; p < r; ++p) {
            total.pair_mean[p] += s.pair_mean[p];
            total.pair_sq[p] += s.pair_sq[p];
            total.pair_sq_sq[p] += s.pair_sq_sq[p];
        }
        for (std::size_t i = 0; i < n; ++i) {
            total.freq_mean[i] += s.freq_mean[i];
            total.freq_sq[i] += s.freq_sq[i];
            total.freq_sq_sq[i] += s.freq_sq_sq[i];
        }
        for (std::size_t q = 0; q < total.timeline.size(); ++q) total.timeline[q] += s.timeline[q];
        total.rho += s.rho;
        total.rho_sq += s.rho_sq;
    }

    const auto P = static_cast<double>(cfg.trajectories);
    auto std_error = [P](double sum, double sum_sq) {
        if (P < 2.0) return 0.0;
        const double mean = sum / P;
        const double var = std::max(0.0, (sum_sq - P * mean * mean) / (P - 1.0));
        return std::sqrt(var / P);
    };

    EnsembleStats out;
    out.h_used = h;
    out.steps = steps;
    out.samples_per_path = samples;
    for (std::size_t p = 0; p < r; ++p) {
        const double mean = total.pair_mean[p] / P;
        out.pairs.push_back({pairs[p].first, pairs[p].second, total.pair_sq[p] / P - mean * mean,
                             std_error(total.pair_sq[p], total.pair_sq_sq[p])});
    }
    out.frequency_variance.resize(N);
    out.frequency_std_error.resize(N);
    for (std::size_t i = 0; i < n; ++i) {
        const double mean = total.freq_mean[i] / P;
        out.frequency_variance(static_cast<Eigen::Index>(i)) = total.freq_sq[i] / P - mean * mean;
        out.frequency_std_error(static_cast<Eigen::Index>(i)) =
            std_error(total.freq_sq[i], total.freq_sq_sq[i]);
    }
    out.rho_hat = total.rho / P;
    out.rho_std_error = std_error(total.rho, total.rho_sq);
    for (std::size_t q = 0; q < total.timeline.size(); ++q) {
        out.mean_disagreement =
            std::max(out.mean_disagreement, std::abs(total.timeline[q] / P - out.rho_hat));
    }
    return out;
}

ImpulseResponse impulse_response(const ScaledParams& sp, double h, double T) {
    if (!(h > 0.0) || h > 0.01) throw ValidationError("impulse response needs 0 < h <= 0.01");
    if (!(T > 1.0)) throw ValidationError("horizon must exceed the delay");
    const auto m = static_cast<std::size_t>(std::ceil(1.0 / h - 1e-9));
    const double dt = 1.0 / static_cast<double>(m);
    const auto max_steps = static_cast<std::size_t>(std::ceil(T / dt));

    std::vector<double> x{0.0}, v{1.0}, a;
    auto accel = [&](double xx, double vv, double xd, double vd) {
        return -sp.s1 * vv - sp.s2 * xx - sp.k2 * vd - sp.k1 * xd;
    };
    a.push_back(accel(0.0, 1.0, 0.0, 0.0));

    // Delayed state at grid index j + c (c in {0, 1/2, 1}), j >= 0.
    auto delayed = [&](std::size_t j, double c, double& xd, double& vd) {
        if (c == 0.0) {
            xd = x[j];
            vd = v[j];
        } else if (c == 1.0) {
            xd = x[j + 1];
            vd = v[j + 1];
        } else {
            xd = 0.5 * (x[j] + x[j + 1]) + dt / 8.0 * (v[j] - v[j + 1]);
            vd = 0.5 * (v[j] + v[j + 1]) + dt / 8.0 * (a[j] - a[j + 1]);
        }
    };

    double unit_max = 0.0, prev_unit_max = 1.0;
    for (std::size_t k = 0; k < max_steps; ++k) {
        double xd0 = 0, vd0 = 0, xdh = 0, vdh = 0, xd1 = 0, vd1 = 0;
        if (k + 1 > m) {
            const std::size_t j = k - m;
            delayed(j, 0.0, xd0, vd0);
            delayed(j, 0.5, xdh, vdh);
            delayed(j, 1.0, xd1, vd1);
        }
        const double x0 = x[k], v0 = v[k];
        const double k1x = v0, k1v = accel(x0, v0, xd0, vd0);
        const double k2x = v0 + 0.5 * dt * k1v;
        const double k2v = accel(x0 + 0.5 * dt * k1x, v0 + 0.5 * dt * k1v, xdh, vdh);
        const double k3x = v0 + 0.5 * dt * k2v;
        const double k3v = accel(x0 + 0.5 * dt * k2x, v0 + 0.5 * dt * k2v, xdh, vdh);
        const double k4x = v0 + dt * k3v;
        const double k4v = accel(x0 + dt * k3x, v0 + dt * k3v, xd1, vd1);
        const double xn = x0 + dt / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
        const double vn = v0 + dt / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
        x.push_back(xn);
        v.push_back(vn);
        double xa = 0.0, va = 0.0;
        if (k + 1 >= m) {
            xa = x[k + 1 - m];
            va = v[k + 1 - m];
        }
        a.push_back(accel(xn, vn, xa, va));

        if (!std::isfinite(xn) || std::abs(xn) > 1e10 || std::abs(vn) > 1e10) {
            throw InfeasibleError("impulse response grows; the mode is unstable");
        }
        unit_max = std::max({unit_max, std::abs(xn), std::abs(vn)});
        if ((k + 1) % m == 0) {
            if (unit_max < 1e-8 && prev_unit_max < 1e-8) {
                ImpulseResponse out;
                out.h = dt;
                out.x = std::move(x);
                double s = 0.0;
                for (std::size_t i = 0; i < out.x.size(); ++i) {
                    const double w = (i == 0 || i + 1 == out.x.size()) ? 0.5 : 1.0;
                    s += w * out.x[i] * out.x[i];
                }
                out.integral_sq = s * dt;
                out.truncated_at = dt * static_cast<double>(out.x.size() - 1);
                return out;
            }
            prev_unit_max = unit_max;
            unit_max = 0.0;
        }
    }
    throw InfeasibleError("impulse response did not decay within the horizon");
}

}  // namespace wacrisk
