#include "wacrisk/network_model.hpp"

#include "wacrisk/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

namespace wacrisk {

namespace {

constexpr double kUniformityTol = 1e-12;
constexpr double kConnectivityRatio = 1e-8;

bool nearly_equal(double a, double b) {
    return std::abs(a - b) <= kUniformityTol * std::max(std::abs(a), std::abs(b));
}

void require_square(const Eigen::MatrixXd& A, const char* what) {
    if (A.rows() != A.cols()) {
        std::ostringstream msg;
        msg << what << " must be square, got " << A.rows() << "x" << A.cols();
        throw ValidationError(msg.str());
    }
}

bool is_symmetric(const Eigen::MatrixXd& A, double rel_tol) {
    const double scale = std::max(1.0, A.cwiseAbs().maxCoeff());
    return (A - A.transpose()).cwiseAbs().maxCoeff() <= rel_tol * scale;
}

Eigen::Index dominant_index(const Eigen::VectorXd& v) {
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < v.size(); ++i) {
        if (std::abs(v(i)) > std::abs(v(best)) * (1.0 + 1e-12)) best = i;
    }
    return best;
}

void fix_sign(Eigen::Ref<Eigen::VectorXd> v) {
    if (v(dominant_index(v)) < 0.0) v = -v;
}

// Groups consecutive sorted values into clusters of numerically equal entries.
std::vector<std::pair<Eigen::Index, Eigen::Index>> clusters(const Eigen::VectorXd& sorted,
                                                            double tol) {
    std::vector<std::pair<Eigen::Index, Eigen::Index>> out;
    Eigen::Index start = 0;
    for (Eigen::Index i = 1; i <= sorted.size(); ++i) {
        if (i == sorted.size() || sorted(i) - sorted(i - 1) > tol) {
            out.emplace_back(start, i - start);
            start = i;
        }
    }
    return out;
}

// Diagonalizes the restriction of `A` to the columns of `V` and rotates V in place.
// Returns the restricted eigenvalues (ascending).
Eigen::VectorXd rotate_block(Eigen::Ref<Eigen::MatrixXd> V, const Eigen::MatrixXd& A) {
    const Eigen::MatrixXd block = V.transpose() * A * V;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (block + block.transpose()));
    V = V * es.eigenvectors();
    return es.eigenvalues();
}

}  // namespace

double NetworkModel::inertia() const {
    if (generators.empty()) throw ValidationError("network has no generators");
    const double J = generators.front().inertia;
    for (const auto& g : generators) {
        if (!(g.inertia > 0.0)) throw ValidationError("generator inertia must be positive");
        if (!nearly_equal(g.inertia, J)) {
            throw ValidationError("generators must share a common inertia J");
        }
    }
    return J;
}

double NetworkModel::damping_ratio() const {
    const double J = inertia();
    const double beta = generators.front().damping;
    for (const auto& g : generators) {
        if (!(g.damping > 0.0)) throw ValidationError("generator damping must be positive");
        if (!nearly_equal(g.damping, beta)) {
            throw ValidationError("generators must share a common damping beta");
        }
    }
    return beta / J;
}

Eigen::MatrixXd ModalSystem::phase_gain_matrix() const {
    return basis * mu.asDiagonal() * basis.transpose();
}

Eigen::MatrixXd ModalSystem::frequency_gain_matrix() const {
    return basis * kappa.asDiagonal() * basis.transpose();
}

Eigen::MatrixXd ModalSystem::laplacian() const {
    return basis * lambda.asDiagonal() * basis.transpose();
}

LaplacianSpectrum decompose_laplacian(const Eigen::MatrixXd& laplacian) {
    require_square(laplacian, "Laplacian");
    const Eigen::Index n = laplacian.rows();
    if (n < 2) throw ValidationError("network needs at least two generators");
    if (!laplacian.allFinite()) throw ValidationError("Laplacian has non-finite entries");
    if (!is_symmetric(laplacian, 1e-10)) throw ValidationError("Laplacian must be symmetric");
    const double scale = std::max(1.0, laplacian.cwiseAbs().maxCoeff());
    if (laplacian.rowwise().sum().cwiseAbs().maxCoeff() > 1e-9 * scale) {
        throw ValidationError("Laplacian rows must sum to zero");
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (laplacian + laplacian.transpose()));
    if (es.info() != Eigen::Success) throw ConvergenceError("Laplacian eigensolver failed");
    Eigen::VectorXd lambda = es.eigenvalues();
    Eigen::MatrixXd Q = es.eigenvectors();

    const double lambda_max = lambda(n - 1);
    if (!(lambda_max > 0.0) || !(lambda(1) > kConnectivityRatio * lambda_max)) {
        throw ValidationError("network graph is disconnected (lambda_2 is numerically zero)");
    }
    if (lambda(0) < -1e-9 * lambda_max) {
        throw ValidationError("Laplacian has a negative eigenvalue; couplings must be nonnegative");
    }

    // Pin the consensus mode exactly, then re-orthonormalize the rest against it.
    lambda(0) = 0.0;
    Q.col(0).setConstant(1.0 / std::sqrt(static_cast<double>(n)));
    for (Eigen::Index l = 1; l < n; ++l) {
        for (Eigen::Index m = 0; m < l; ++m) Q.col(l) -= Q.col(m).dot(Q.col(l)) * Q.col(m);
        Q.col(l).normalize();
        fix_sign(Q.col(l));
    }

    // Ties are ordered by the index of the dominant eigenvector component.
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    const double tie_tol = 1e-9 * lambda_max;
    for (const auto& [start, len] : clusters(lambda, tie_tol)) {
        if (len < 2) continue;
        std::stable_sort(order.begin() + start, order.begin() + start + len,
                         [&](Eigen::Index a, Eigen::Index b) {
                             return dominant_index(Q.col(a)) < dominant_index(Q.col(b));
                         });
    }

    LaplacianSpectrum out;
    out.laplacian = laplacian;
    out.eigenvalues.resize(n);
    out.eigenvectors.resize(n, n);
    for (Eigen::Index l = 0; l < n; ++l) {
        out.eigenvalues(l) = lambda(order[static_cast<std::size_t>(l)]);
        out.eigenvectors.col(l) = Q.col(order[static_cast<std::size_t>(l)]);
    }
    return out;
}

LaplacianSpectrum build_laplacian(const NetworkModel& model) {
    const auto n = static_cast<Eigen::Index>(model.size());
    if (n < 2) throw ValidationError("network needs at least two generators");
    for (const auto& g : model.generators) {
        if (!(g.inertia > 0.0) || !(g.damping > 0.0) || !(g.voltage > 0.0)) {
            throw ValidationError("generator J, beta and E must all be positive");
        }
    }
    // Assumption of uniform machines.
    (void)model.damping_ratio();

    if (model.laplacian_override) {
        if (model.laplacian_override->rows() != n) {
            throw ValidationError("laplacian dimension does not match generator count");
        }
        return decompose_laplacian(*model.laplacian_override);
    }

    const Eigen::MatrixXd& Y = model.susceptance;
    if (Y.rows() != n || Y.cols() != n) {
        throw ValidationError("susceptance dimension does not match generator count");
    }
    if (!is_symmetric(Y, 1e-12)) throw ValidationError("susceptance must be symmetric");
    if (Y.diagonal().cwiseAbs().maxCoeff() != 0.0) {
        throw ValidationError("susceptance diagonal must be zero");
    }
    if (Y.minCoeff() < 0.0) throw ValidationError("susceptance entries must be nonnegative");

    Eigen::VectorXd theta = model.equilibrium_theta;
    if (theta.size() == 0) theta = Eigen::VectorXd::Zero(n);
    if (theta.size() != n) throw ValidationError("equilibrium_theta has wrong length");

    Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& gi = model.generators[static_cast<std::size_t>(i)];
        for (Eigen::Index j = 0; j < n; ++j) {
            if (i == j || Y(i, j) == 0.0) continue;
            const double dtheta = theta(i) - theta(j);
            if (!(std::abs(dtheta) < std::numbers::pi / 2)) {
                std::ostringstream msg;
                msg << "equilibrium outside the coherent manifold: |theta_" << i << " - theta_" << j
                    << "| >= pi/2";
                throw ValidationError(msg.str());
            }
            const auto& gj = model.generators[static_cast<std::size_t>(j)];
            L(i, j) = -gi.voltage * gj.voltage * Y(i, j) * std::cos(dtheta) / gi.inertia;
        }
        L(i, i) = -L.row(i).sum();
    }

    if (model.power_inputs.size() != 0) {
        if (model.power_inputs.size() != n) throw ValidationError("power_inputs has wrong length");
        double worst = 0.0, scale = 1.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            double flow = 0.0;
            for (Eigen::Index j = 0; j < n; ++j) {
                const double c = model.generators[static_cast<std::size_t>(i)].voltage *
                                 model.generators[static_cast<std::size_t>(j)].voltage * Y(i, j);
                flow += c * std::sin(theta(i) - theta(j));
                scale = std::max(scale, c);
            }
            worst = std::max(worst, std::abs(flow - model.power_inputs(i)));
        }
        if (worst > 1e-6 * scale) {
            throw ValidationError("equilibrium_theta does not balance power_inputs");
        }
    }
    return decompose_laplacian(L);
}

Eigen::MatrixXcd kron_reduce(const Eigen::MatrixXcd& admittance,
                             const std::vector<std::size_t>& generator_buses) {
    const Eigen::Index n = admittance.rows();
    if (admittance.cols() != n) throw ValidationError("admittance matrix must be square");
    std::vector<bool> keep(static_cast<std::size_t>(n), false);
    for (auto b : generator_buses) {
        if (b >= static_cast<std::size_t>(n)) throw ValidationError("generator bus out of range");
        if (keep[b]) throw ValidationError("duplicate generator bus");
        keep[b] = true;
    }
    std::vector<Eigen::Index> kept, elim;
    for (auto b : generator_buses) kept.push_back(static_cast<Eigen::Index>(b));
    for (Eigen::Index i = 0; i < n; ++i) {
        if (!keep[static_cast<std::size_t>(i)]) elim.push_back(i);
    }
    const auto g = static_cast<Eigen::Index>(kept.size());
    const auto e = static_cast<Eigen::Index>(elim.size());

    Eigen::MatrixXcd Ygg(g, g), Yge(g, e), Yeg(e, g), Yee(e, e);
    for (Eigen::Index a = 0; a < g; ++a) {
        for (Eigen::Index b = 0; b < g; ++b) Ygg(a, b) = admittance(kept[a], kept[b]);
        for (Eigen::Index b = 0; b < e; ++b) Yge(a, b) = admittance(kept[a], elim[b]);
    }
    for (Eigen::Index a = 0; a < e; ++a) {
        for (Eigen::Index b = 0; b < g; ++b) Yeg(a, b) = admittance(elim[a], kept[b]);
        for (Eigen::Index b = 0; b < e; ++b) Yee(a, b) = admittance(elim[a], elim[b]);
    }
    if (e == 0) return Ygg;

    Eigen::FullPivLU<Eigen::MatrixXcd> lu(Yee);
    const double scale = std::max(1.0, Yee.cwiseAbs().maxCoeff());
    lu.setThreshold(1e-12 * scale);
    if (!lu.isInvertible()) throw ValidationError("interior admittance block is singular");
    Eigen::MatrixXcd reduced = Ygg - Yge * lu.solve(Yeg);
    return 0.5 * (reduced + reduced.transpose());
}

Eigen::MatrixXd coupling_susceptance(const Eigen::MatrixXcd& reduced_admittance) {
    Eigen::MatrixXd Y = reduced_admittance.imag();
    Y.diagonal().setZero();
    return Y;
}

double effective_resistance(const Eigen::VectorXd& eigenvalues) {
    double sum = 0.0;
    for (Eigen::Index l = 1; l < eigenvalues.size(); ++l) {
        if (!(eigenvalues(l) > 0.0)) {
            throw ValidationError("effective resistance needs positive eigenvalues beyond the first");
        }
        sum += 1.0 / eigenvalues(l);
    }
    return sum;
}

double effective_resistance(const LaplacianSpectrum& spectrum) {
    return effective_resistance(spectrum.eigenvalues);
}

CommutingResult check_commuting(const Eigen::MatrixXd& L, const Eigen::MatrixXd& M,
                                const Eigen::MatrixXd& K, double tol) {
    CommutingResult res;
    const Eigen::Index n = L.rows();
    if (L.cols() != n || M.rows() != n || M.cols() != n || K.rows() != n || K.cols() != n) {
        throw ValidationError("L, M, K must be square with equal dimensions");
    }
    auto rel_commutator = [](const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
        const double c = (A * B - B * A).norm();
        const double s = A.norm() * B.norm();
        return s > 0.0 ? c / s : 0.0;
    };
    res.max_commutator =
        std::max({rel_commutator(L, M), rel_commutator(L, K), rel_commutator(M, K)});
    if (!(res.max_commutator < tol)) return res;

    const LaplacianSpectrum spec = decompose_laplacian(L);
    Eigen::MatrixXd Q = spec.eigenvectors;
    const double lam_tol = 1e-8 * std::max(1.0, spec.norm());
    const double gain_tol = 1e-8 * std::max({1.0, M.norm(), K.norm()});

    for (const auto& [start, len] : clusters(spec.eigenvalues, lam_tol)) {
        if (len < 2) continue;
        auto V = Q.middleCols(start, len);
        const Eigen::VectorXd mu_block = rotate_block(V, M);
        for (const auto& [s2, l2] : clusters(mu_block, gain_tol)) {
            if (l2 < 2) continue;
            auto W = Q.middleCols(start + s2, l2);
            rotate_block(W, K);
        }
        for (Eigen::Index c = start; c < start + len; ++c) fix_sign(Q.col(c));
    }

    res.commuting = true;
    res.basis = Q;
    res.lambda = spec.eigenvalues;
    res.mu = (Q.transpose() * M * Q).diagonal();
    res.kappa = (Q.transpose() * K * Q).diagonal();
    return res;
}

ModalSystem resolve_gains(const LaplacianSpectrum& spectrum, const GainSpec& gains, double tol) {
    const auto n = static_cast<Eigen::Index>(spectrum.size());
    ModalSystem sys;
    sys.lambda = spectrum.eigenvalues;
    sys.basis = spectrum.eigenvectors;

    if (const auto* eg = std::get_if<EigenGains>(&gains)) {
        if (eg->mu.size() != n || eg->kappa.size() != n) {
            throw ValidationError("per-mode gain lists must have one entry per generator");
        }
        sys.mu = eg->mu;
        sys.kappa = eg->kappa;
    } else if (const auto* cg = std::get_if<ConsensusGains>(&gains)) {
        sys.mu = cg->mu * spectrum.eigenvalues;
        sys.kappa = cg->kappa * spectrum.eigenvalues;
    } else {
        const auto& dg = std::get<DenseGains>(gains);
        if (dg.M.rows() != n || dg.M.cols() != n || dg.K.rows() != n || dg.K.cols() != n) {
            throw ValidationError("gain matrices must match the network dimension");
        }
        if (!is_symmetric(dg.M, 1e-10) || !is_symmetric(dg.K, 1e-10)) {
            throw ValidationError("gain matrices must be symmetric");
        }
        const CommutingResult cr = check_commuting(spectrum.laplacian, dg.M, dg.K, tol);
        if (!cr.commuting) {
            std::ostringstream msg;
            msg << "gain matrices do not commute with the Laplacian (relative commutator "
                << cr.max_commutator << ")";
            throw ValidationError(msg.str());
        }
        sys.basis = cr.basis;
        sys.lambda = cr.lambda;
        sys.mu = cr.mu;
        sys.kappa = cr.kappa;
        // eigenvalues recovered from a dense matrix carry roundoff; zero means zero
        const double zm = 1e-12 * std::max(1.0, dg.M.norm()), zk = 1e-12 * std::max(1.0, dg.K.norm());
        for (Eigen::Index l = 0; l < n; ++l) {
            if (std::abs(sys.mu(l)) < zm) sys.mu(l) = 0.0;
            if (std::abs(sys.kappa(l)) < zk) sys.kappa(l) = 0.0;
        }
    }
    if (!sys.mu.allFinite() || !sys.kappa.allFinite()) {
        throw ValidationError("gains must be finite");
    }
    return sys;
}

}  // namespace wacrisk
