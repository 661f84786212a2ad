#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <variant>
#include <vector>

namespace wacrisk {

/// Static data of one synchronous machine.
struct GeneratorParams {
    double inertia = 0.0;  ///< J, MJ/MVA
    double damping = 0.0;  ///< beta
    double voltage = 1.0;  ///< E, per unit
};

/// Reduced (generator-bus) description of a power network around an
/// operating point.  Either `susceptance` or `laplacian_override` must be set;
/// the override wins when both are present.
struct NetworkModel {
    std::vector<GeneratorParams> generators;
    Eigen::MatrixXd susceptance;        ///< Y_ij >= 0, zero diagonal; may be empty
    Eigen::VectorXd equilibrium_theta;  ///< radians; empty means all zero
    Eigen::VectorXd power_inputs;       ///< optional; checked against the equilibrium when present
    std::optional<Eigen::MatrixXd> laplacian_override;

    std::size_t size() const { return generators.size(); }

    /// Shared inertia J.  Throws ValidationError when generators differ.
    double inertia() const;
    /// Shared damping ratio d = beta / J.  Throws ValidationError when generators differ.
    double damping_ratio() const;
};

/// J-normalized Laplacian with its sorted orthonormal eigendecomposition.
/// eigenvalues(0) is exactly 0 and eigenvectors.col(0) is exactly 1/sqrt(n).
struct LaplacianSpectrum {
    Eigen::MatrixXd laplacian;
    Eigen::VectorXd eigenvalues;
    Eigen::MatrixXd eigenvectors;

    std::size_t size() const { return static_cast<std::size_t>(eigenvalues.size()); }
    /// Spectral norm, i.e. the largest eigenvalue.
    double norm() const { return eigenvalues(eigenvalues.size() - 1); }
};

/// Per-mode gains (mu_l, kappa_l), aligned with the sorted Laplacian spectrum.
struct EigenGains {
    Eigen::VectorXd mu;
    Eigen::VectorXd kappa;
};

/// M = mu L, K = kappa L.
struct ConsensusGains {
    double mu = 0.0;
    double kappa = 0.0;
};

/// Explicit symmetric gain matrices; must commute with L and with each other.
struct DenseGains {
    Eigen::MatrixXd M;
    Eigen::MatrixXd K;
};

using GainSpec = std::variant<EigenGains, ConsensusGains, DenseGains>;

/// A network and its feedback gains expressed in a shared orthonormal
/// eigenbasis.  Everything downstream of the network works on this.
struct ModalSystem {
    Eigen::VectorXd lambda;
    Eigen::VectorXd mu;
    Eigen::VectorXd kappa;
    Eigen::MatrixXd basis;  ///< Q, column l is the l-th shared eigenvector

    std::size_t size() const { return static_cast<std::size_t>(lambda.size()); }
    Eigen::MatrixXd phase_gain_matrix() const;      ///< M = Q diag(mu) Q^T
    Eigen::MatrixXd frequency_gain_matrix() const;  ///< K = Q diag(kappa) Q^T
    Eigen::MatrixXd laplacian() const;              ///< L = Q diag(lambda) Q^T
};

struct CommutingResult {
    bool commuting = false;
    double max_commutator = 0.0;  ///< largest relative commutator norm observed
    Eigen::MatrixXd basis;        ///< shared eigenbasis (only on success)
    Eigen::VectorXd lambda;
    Eigen::VectorXd mu;
    Eigen::VectorXd kappa;
};

/// Builds the J-normalized Laplacian of `model` and its spectrum.
LaplacianSpectrum build_laplacian(const NetworkModel& model);

/// Validates and decomposes an explicit Laplacian.
LaplacianSpectrum decompose_laplacian(const Eigen::MatrixXd& laplacian);

/// Schur complement of the bus admittance matrix onto `generator_buses`.
Eigen::MatrixXcd kron_reduce(const Eigen::MatrixXcd& admittance,
                             const std::vector<std::size_t>& generator_buses);

/// Coupling susceptances Y_ij = Im(Y_red,ij) off the diagonal, zero on it.
Eigen::MatrixXd coupling_susceptance(const Eigen::MatrixXcd& reduced_admittance);

/// Sum of reciprocal eigenvalues beyond the first.
double effective_resistance(const Eigen::VectorXd& eigenvalues);
double effective_resistance(const LaplacianSpectrum& spectrum);

CommutingResult check_commuting(const Eigen::MatrixXd& L, const Eigen::MatrixXd& M,
                                const Eigen::MatrixXd& K, double tol = 1e-9);

/// Expresses `gains` in the eigenbasis of `spectrum`.  Dense gains that do not
/// commute with L raise ValidationError.
ModalSystem resolve_gains(const LaplacianSpectrum& spectrum, const GainSpec& gains,
                          double tol = 1e-9);

}  // namespace wacrisk
