#pragma once

#include "wacrisk/network_model.hpp"

#include <complex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace wacrisk {

/// A decomposed mode with the delay folded into the coefficients:
/// (s1, s2; k1, k2) = (d tau, lambda tau^2; mu tau^2, kappa tau).
struct ScaledParams {
    double s1 = 0.0;
    double s2 = 0.0;
    double k1 = 0.0;
    double k2 = 0.0;
};

ScaledParams scale(double d, double lambda, double mu, double kappa, double tau);

/// Delay-free stability of one mode: kappa + d > 0 and lambda + mu > 0.
bool tau0_stable(double d, double lambda, double mu, double kappa);

/// A purely imaginary root i*gamma of the unit-delay characteristic function
/// and its crossing angle phi in [0, 2 pi).
struct Crossing {
    double gamma = 0.0;
    double phi = 0.0;
};

/// Positive crossing frequencies, largest first.  Throws InfeasibleError when
/// the characteristic function never touches the imaginary axis.
std::vector<Crossing> gamma_phi(const ScaledParams& sp);

struct SwitchStructure {
    double gamma_plus = 0.0;
    double gamma_minus = 0.0;  ///< 0 when there is a single crossing
    double phi_plus = 0.0;
    double phi_minus = 0.0;
    bool two_crossings = false;
    int l_star = 0;
    /// Stable delay intervals as multiples of the current delay, in increasing
    /// order: [0, a0), (b1, a1), ... .  The first lower endpoint is 0.
    std::vector<std::pair<double, double>> tau_windows;
};

SwitchStructure switch_structure(const ScaledParams& sp);

enum class Region { W0, W1, W2, W3, DelayStabilized, Undelayed, None };

std::string to_string(Region r);

struct StabilityOptions {
    double boundary_band = 1e-9;
    /// Restrict to the four tabulated sets; tuples that are unstable without
    /// delay are then never classified stable.
    bool table_only = false;
};

struct StabilityVerdict {
    bool stable = false;
    Region region = Region::None;
    bool boundary = false;  ///< a deciding inequality held within the band
    /// Signed slack of the deciding inequality (positive on the stable side).
    double margin = 0.0;
    /// phi+/gamma+ when a single crossing exists: the first critical delay in
    /// units of the current delay.
    std::optional<double> critical_delay_ratio;
    std::optional<SwitchStructure> switches;
};

StabilityVerdict membership_w(const ScaledParams& sp, const StabilityOptions& opts = {});

struct ModeVerdict {
    std::size_t mode = 0;
    double lambda = 0.0;
    double mu = 0.0;
    double kappa = 0.0;
    ScaledParams scaled;
    StabilityVerdict verdict;
};

struct NetworkVerdict {
    bool stable = false;
    std::vector<ModeVerdict> modes;
    /// True when mu_1 = kappa_1 = 0, so the phases settle at rho * 1 with
    /// rho = theta_weight * sum(phi_theta(0)) + omega_weight * sum(phi_omega(0)).
    bool consensus_preserved = false;
    double rho_theta_weight = 0.0;
    double rho_omega_weight = 0.0;

    double consensus_value(const Eigen::VectorXd& theta0, const Eigen::VectorXd& omega0) const;
};

/// Per-mode verdicts.  tau = 0 falls back to the delay-free test.
NetworkVerdict network_stable(const ModalSystem& sys, double d, double tau,
                              const StabilityOptions& opts = {});
NetworkVerdict network_stable(const LaplacianSpectrum& spectrum, const GainSpec& gains, double d,
                              double tau, const StabilityOptions& opts = {});

/// c(eta) = eta^2 + s1 eta + k2 eta e^-eta + s2 + k1 e^-eta.
std::complex<double> characteristic(const ScaledParams& sp, std::complex<double> eta);

/// Rightmost root of c via Chebyshev collocation of the solution operator
/// generator, polished with Newton on c.
std::complex<double> rightmost_root(const ScaledParams& sp, int resolution = 128);

}  // namespace wacrisk
