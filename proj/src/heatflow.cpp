#include "drift/heatflow.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>
#include <ostream>
#include <string>

#include <Eigen/SparseCholesky>

#include "drift/errors.hpp"

namespace drift {

namespace {

constexpr double kStepResidual = 1e-10;
constexpr double kRepresentationTolerance = 1e-8;

std::string format_p(double p) {
    std::ostringstream ss;
    ss << p;
    return ss.str();
}

void check_step_restriction(double dt, double c) {
    if (!(dt > 0.0)) throw DomainError("time step must be positive");
    if (c > 0.0 && !(1.0 - dt * c > 0.0)) {
        throw DomainError("step restriction violated: 1 - dt*c must be positive (dt=" +
                          std::to_string(dt) + ", c=" + std::to_string(c) + ")");
    }
}

}  // namespace

const char* to_string(Integrator integrator) {
    return integrator == Integrator::ImplicitEuler ? "implicit-euler" : "spectral";
}

void HeatConfig::check() const {
    if (!std::isfinite(c)) throw DomainError("c must be finite");
    if (!(dt > 0.0) || !(t_end > 0.0)) throw DomainError("dt and t_end must be positive");
    if (dt > t_end) throw DomainError("dt must not exceed t_end");
    if (p_list.empty()) throw DomainError("p_list must not be empty");
    for (double p : p_list) {
        if (!(p >= 1.0)) throw DomainError("every p in p_list must be >= 1");
    }
    if (record_every < 1) throw DomainError("record_every must be positive");
}

int HeatConfig::step_count() const {
    return std::max(1, static_cast<int>(std::ceil(t_end / dt - 1e-9)));
}

const std::vector<double>& EnergyTrace::energy_for(double p) const {
    for (std::size_t j = 0; j < p_list.size(); ++j) {
        if (p_list[j] == p) return energies[j];
    }
    throw DomainError("trace has no energies for p = " + format_p(p));
}

struct ImplicitEulerStepper::Impl {
    const WeightedOperator* op = nullptr;
    SparseMatrix system;
    Eigen::SimplicialLDLT<SparseMatrix> factor;
};

ImplicitEulerStepper::ImplicitEulerStepper(const WeightedOperator& op, double dt, double c)
    : impl_(std::make_unique<Impl>()) {
    check_step_restriction(dt, c);
    impl_->op = &op;
    // M + dt (S - c M) = dt S + (1 - dt c) M
    impl_->system = dt * op.stiffness();
    const double mass_scale = 1.0 - dt * c;
    for (int i = 0; i < op.size(); ++i) impl_->system.coeffRef(i, i) += mass_scale * op.mass()[i];
    impl_->factor.compute(impl_->system);
    if (impl_->factor.info() != Eigen::Success) {
        throw SolverError("factorization of the implicit Euler system failed");
    }
}

ImplicitEulerStepper::~ImplicitEulerStepper() = default;
ImplicitEulerStepper::ImplicitEulerStepper(ImplicitEulerStepper&&) noexcept = default;
ImplicitEulerStepper& ImplicitEulerStepper::operator=(ImplicitEulerStepper&&) noexcept = default;

Eigen::VectorXd ImplicitEulerStepper::step(const Eigen::VectorXd& u) const {
    if (u.size() != impl_->op->size()) throw DimensionError("implicit Euler: length mismatch");
    const Eigen::VectorXd rhs = impl_->op->mass().asDiagonal() * u;
    const double rhs_norm = rhs.norm();
    Eigen::VectorXd next = impl_->factor.solve(rhs);
    // Iterative refinement until the relative residual target is met.
    for (int round = 0;; ++round) {
        const Eigen::VectorXd r = rhs - impl_->system * next;
        if (r.norm() <= kStepResidual * rhs_norm) break;
        if (round == 3) throw SolverError("implicit Euler solve missed its residual target");
        next += impl_->factor.solve(r);
    }
    return next;
}

Eigen::VectorXd step_implicit_euler(const WeightedOperator& op, const Eigen::VectorXd& u, double dt,
                                    double c) {
    return ImplicitEulerStepper(op, dt, c).step(u);
}

Eigen::VectorXd spectral_evolve(const WeightedOperator& op, const EigenResult& eig,
                                const Eigen::VectorXd& u0, double t, double c) {
    if (u0.size() != op.size() || eig.eigenvectors.rows() != op.size()) {
        throw DimensionError("spectral_evolve: length mismatch");
    }
    if (!(t >= 0.0)) throw DomainError("spectral_evolve needs t >= 0");
    const Eigen::VectorXd coeffs = eig.eigenvectors.transpose() * (op.mass().asDiagonal() * u0);
    const double missing = op.mass_norm(u0 - eig.eigenvectors * coeffs);
    if (missing > kRepresentationTolerance * op.mass_norm(u0)) {
        throw RepresentationError("eigenbasis of " + std::to_string(eig.size()) +
                                      " pairs does not represent u0 (M-norm residual " +
                                      std::to_string(missing) + ")",
                                  missing);
    }
    Eigen::VectorXd decay(eig.size());
    for (int i = 0; i < eig.size(); ++i) decay[i] = std::exp((c - eig.eigenvalues[i]) * t);
    return eig.eigenvectors * (decay.array() * coeffs.array()).matrix();
}

EnergyTrace evolve(const WeightedOperator& op, const Eigen::VectorXd& u0, const HeatConfig& cfg,
                   const EigenResult* eig) {
    cfg.check();
    if (u0.size() != op.size()) throw DimensionError("evolve: initial data length mismatch");
    if (!u0.allFinite()) throw DomainError("evolve: initial data is not finite");

    EnergyTrace trace;
    trace.p_list = cfg.p_list;
    trace.energies.resize(cfg.p_list.size());
    auto record = [&](double t, const Eigen::VectorXd& u) {
        if (!u.allFinite()) {
            throw SolverError("non-finite solution at t = " + std::to_string(t));
        }
        trace.times.push_back(t);
        for (std::size_t j = 0; j < cfg.p_list.size(); ++j) {
            trace.energies[j].push_back(energy(op, u, cfg.p_list[j]));
        }
        trace.weighted_means.push_back(weighted_mean(op, u));
        trace.weighted_l2.push_back(op.mass_inner(u, u));
    };

    const int steps = cfg.step_count();
    const double dt = cfg.t_end / steps;
    record(0.0, u0);

    if (cfg.integrator == Integrator::ImplicitEuler) {
        const ImplicitEulerStepper stepper(op, dt, cfg.c);
        Eigen::VectorXd u = u0;
        for (int s = 1; s <= steps; ++s) {
            u = stepper.step(u);
            if (!u.allFinite()) throw SolverError("non-finite solution at t = " + std::to_string(s * dt));
            if (s % cfg.record_every == 0 || s == steps) record(s * dt, u);
        }
        return trace;
    }

    EigenResult full;
    if (!eig) {
        full = smallest_eigenpairs(op, op.size(), kDefaultEigenTolerance, SolverPath::Dense);
        eig = &full;
    }
    for (int s = 1; s <= steps; ++s) {
        if (s % cfg.record_every == 0 || s == steps) {
            record(s * dt, spectral_evolve(op, *eig, u0, s * dt, cfg.c));
        }
    }
    return trace;
}

std::vector<DecayVerdict> verify_decay(const EnergyTrace& trace, double K, double c, double tol) {
    std::vector<DecayVerdict> verdicts;
    for (std::size_t j = 0; j < trace.p_list.size(); ++j) {
        const double p = trace.p_list[j];
        const auto& e = trace.energies[j];
        DecayVerdict v;
        v.p = p;
        v.tolerance = tol;
        v.worst_margin = -std::numeric_limits<double>::infinity();
        bool ok = true;
        for (std::size_t i = 0; i < trace.times.size(); ++i) {
            const double t = trace.times[i];
            const double bound = std::exp(p * (K - c) * t) * e.front();
            if (!(e[i] <= bound * (1.0 + tol))) ok = false;
            if (i == 0 && trace.times.size() > 1) continue;
            double margin = 0.0;
            if (bound > 0.0) {
                margin = e[i] / bound - 1.0;
            } else if (e[i] > 0.0) {
                margin = std::numeric_limits<double>::infinity();
            }
            if (margin > v.worst_margin) {
                v.worst_margin = margin;
                v.worst_time = t;
            }
        }
        v.pass = ok;
        verdicts.push_back(v);
    }
    return verdicts;
}

void write_trace_csv(const EnergyTrace& trace, double K, double c, std::ostream& out) {
    out << "time";
    for (double p : trace.p_list) out << ",E_" << format_p(p);
    out << ",weighted_mean,weighted_l2";
    for (double p : trace.p_list) out << ",bound_" << format_p(p);
    out << '\n' << std::setprecision(17);
    for (std::size_t i = 0; i < trace.times.size(); ++i) {
        const double t = trace.times[i];
        out << t;
        for (const auto& e : trace.energies) out << ',' << e[i];
        out << ',' << trace.weighted_means[i] << ',' << trace.weighted_l2[i];
        for (std::size_t j = 0; j < trace.p_list.size(); ++j) {
            out << ',' << std::exp(trace.p_list[j] * (K - c) * t) * trace.energies[j].front();
        }
        out << '\n';
    }
}

}  // namespace drift
