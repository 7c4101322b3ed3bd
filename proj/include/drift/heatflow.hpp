#pragma once

#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "drift/spectral.hpp"
#include "drift/weighted_operator.hpp"

namespace drift {

enum class Integrator { ImplicitEuler, SpectralExpansion };

const char* to_string(Integrator integrator);

struct HeatConfig {
    /// Constant zeroth-order coefficient in ∂_t u = L_f u + c u.
    double c = 0.0;
    double dt = 1e-3;
    double t_end = 1.0;
    std::vector<double> p_list{1.0, 2.0, 3.0, 4.0};
    Integrator integrator = Integrator::ImplicitEuler;
    int record_every = 1;

    /// Throws DomainError on an inconsistent configuration.
    void check() const;
    int step_count() const;
};

struct EnergyTrace {
    std::vector<double> p_list;
    std::vector<double> times;
    /// energies[j][i] = E_{p_list[j]} at times[i].
    std::vector<std::vector<double>> energies;
    std::vector<double> weighted_means;
    /// u^T M u at each recorded time.
    std::vector<double> weighted_l2;

    const std::vector<double>& energy_for(double p) const;
};

/// One implicit Euler step: solves (M + dt (S - c M)) u' = M u.
Eigen::VectorXd step_implicit_euler(const WeightedOperator& op, const Eigen::VectorXd& u,
                                    double dt, double c);

/// Implicit Euler with the factorization of M + dt (S - c M) reused across
/// steps.
class ImplicitEulerStepper {
public:
    ImplicitEulerStepper(const WeightedOperator& op, double dt, double c);
    ~ImplicitEulerStepper();
    ImplicitEulerStepper(ImplicitEulerStepper&&) noexcept;
    ImplicitEulerStepper& operator=(ImplicitEulerStepper&&) noexcept;

    Eigen::VectorXd step(const Eigen::VectorXd& u) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Σ_i e^{(c - λ_i) t} (u_i^T M u0) u_i, the exact semigroup of the spatially
/// discrete system. Throws RepresentationError when the basis misses more
/// than 1e-8 of u0 in the M norm.
Eigen::VectorXd spectral_evolve(const WeightedOperator& op, const EigenResult& eig,
                                const Eigen::VectorXd& u0, double t, double c);

/// Integrates from 0 to cfg.t_end, recording every cfg.record_every steps
/// and at t_end. SpectralExpansion uses `eig` when given, otherwise a full
/// dense eigenbasis.
EnergyTrace evolve(const WeightedOperator& op, const Eigen::VectorXd& u0, const HeatConfig& cfg,
                   const EigenResult* eig = nullptr);

struct DecayVerdict {
    double p = 0.0;
    bool pass = false;
    /// max over recorded t > 0 of E_p(t) / (e^{p(K-c)t} E_p(0)) - 1.
    double worst_margin = 0.0;
    double worst_time = 0.0;
    double tolerance = 0.0;
};

/// Checks E_p(t) <= e^{p(K-c)t} E_p(0) (1 + tol) at every recorded time.
/// Failures are reported in the verdict, never thrown.
std::vector<DecayVerdict> verify_decay(const EnergyTrace& trace, double K, double c, double tol);

/// Columns: time, E_<p>..., weighted_mean, weighted_l2, bound_<p>...
void write_trace_csv(const EnergyTrace& trace, double K, double c, std::ostream& out);

}  // namespace drift
