#include "mjsmc/simulator.hpp"

#include <cmath>
#include <ostream>
#include <random>
#include <stdexcept>

namespace mjsmc {

int ModePath::mode_at(double t) const {
    // last jump time <= t
    int idx = 0;
    for (size_t k = 1; k < jump_times.size(); ++k) {
        if (jump_times[k] <= t) idx = static_cast<int>(k);
        else break;
    }
    return modes[idx];
}

ModePath sample_mode_path(const Matrix& true_rates, int mode0, double t_final, int seed) {
    const int N = static_cast<int>(true_rates.rows());
    if (true_rates.cols() != N) throw std::invalid_argument("sample_mode_path: rates not square");
    if (mode0 < 0 || mode0 >= N) throw std::invalid_argument("sample_mode_path: bad initial mode");

    std::mt19937_64 rng(static_cast<uint64_t>(seed));
    ModePath path;
    path.jump_times.push_back(0.0);
    path.modes.push_back(mode0);

    double t = 0.0;
    int mode = mode0;
    while (t < t_final) {
        const double rate = -true_rates(mode, mode);
        if (rate <= 0.0) break;  // absorbing mode
        std::exponential_distribution<double> hold(rate);
        t += hold(rng);
        if (t >= t_final) break;

        std::vector<double> weights(N, 0.0);
        for (int j = 0; j < N; ++j)
            if (j != mode) weights[j] = true_rates(mode, j);
        std::discrete_distribution<int> jump(weights.begin(), weights.end());
        mode = jump(rng);
        path.jump_times.push_back(t);
        path.modes.push_back(mode);
    }
    return path;
}

namespace {

// Linear interpolation in the recorded grid history; constant z0 before t=0,
// clamped to the newest sample for lookups past the recorded horizon.
class History {
public:
    History(const Vector& z0, double dt) : dt_(dt) { samples_.push_back(z0); }

    void push(const Vector& z) { samples_.push_back(z); }

    Vector at(double t) const {
        if (t <= 0.0) return samples_.front();
        const double pos = t / dt_;
        const auto k = static_cast<size_t>(std::floor(pos));
        if (k + 1 >= samples_.size()) return samples_.back();
        const double w = pos - static_cast<double>(k);
        return (1.0 - w) * samples_[k] + w * samples_[k + 1];
    }

private:
    double dt_;
    std::vector<Vector> samples_;
};

Matrix input_map(const RegularForm& rf, int n, int m) {
    Matrix Bbar = Matrix::Zero(n, m);
    Bbar.bottomRows(m) = rf.B2;
    return Bbar;
}

}  // namespace

Trajectory simulate(const MjlsSystem& system, const ControllerGains& gains,
                    const SurfaceRealization& realization, const SimConfig& config) {
    if (!system.transitions.true_rates)
        throw std::invalid_argument("simulate: transition rates for sampling are not set");
    if (config.dt <= 0.0 || config.t_final <= 0.0)
        throw std::invalid_argument("simulate: dt and t_final must be positive");
    if (config.z0.size() != system.n)
        throw std::invalid_argument("simulate: z0 dimension mismatch");

    const int n = system.n;
    const int m = system.m;
    std::vector<RegularForm> forms;
    for (const ModeData& md : system.modes) forms.push_back(compute_regular_form(md));

    const ModePath path =
        sample_mode_path(*system.transitions.true_rates, config.mode0, config.t_final, config.seed);

    const auto steps = static_cast<size_t>(std::ceil(config.t_final / config.dt));
    const double dt = config.dt;

    Trajectory traj;
    History history(config.z0, dt);
    Vector z = config.z0;
    double r = 0.0;

    for (size_t k = 0; k <= steps; ++k) {
        const double t = static_cast<double>(k) * dt;
        const int mode = path.mode_at(t);
        const TauForm& tau_fn = system.delays.tau[mode];
        const RegularForm& rf = forms[mode];
        const Matrix Abar = rf.Abar();
        const Matrix Adbar = rf.Adbar();
        const Matrix Bbar = input_map(rf, n, m);

        const Vector s = surface_value(realization, z, mode);
        const double tau_now = tau_fn(t);

        Vector u;
        if (gains.variant == ControllerVariant::KnownDelay) {
            const Vector z_delayed = history.at(t - tau_now);
            u = smc_control(gains, realization, forms, system.transitions, z, z_delayed, mode);
        } else {
            u = adaptive_control(gains, realization, forms, system.transitions, z, s, r, mode,
                                 config.margin);
        }

        traj.t.push_back(t);
        traj.mode.push_back(mode);
        traj.z.push_back(z);
        traj.s.push_back(s);
        traj.u.push_back(u);
        traj.r.push_back(r);
        traj.tau.push_back(tau_now);
        if (k == steps) break;

        // RK4 with the control held over the step; the delayed state is read
        // from the recorded history (dt << tau keeps the lookup in the past).
        auto deriv = [&](double ts, const Vector& zs) -> Vector {
            const Vector zd = history.at(ts - tau_fn(ts));
            const Vector w = config.disturbance.amplitude *
                             std::sin(config.disturbance.omega * ts) * Vector::Ones(m);
            return Abar * zs + Adbar * zd + Bbar * (u + w);
        };
        const Vector k1 = deriv(t, z);
        const Vector k2 = deriv(t + 0.5 * dt, z + 0.5 * dt * k1);
        const Vector k3 = deriv(t + 0.5 * dt, z + 0.5 * dt * k2);
        const Vector k4 = deriv(t + dt, z + dt * k3);
        z += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

        if (gains.variant == ControllerVariant::Adaptive)
            r += dt * adaptive_rate(gains, realization, forms, s, traj.z.back(), gains.beta);

        if (!z.allFinite()) throw std::runtime_error("simulate: state diverged (non-finite)");
        history.push(z);
    }
    return traj;
}

Trajectory simulate_sliding(const MjlsSystem& system,
                            const std::vector<std::pair<Matrix, Matrix>>& sliding,
                            const SimConfig& config) {
    if (!system.transitions.true_rates)
        throw std::invalid_argument("simulate_sliding: transition rates for sampling are not set");
    const int q = static_cast<int>(config.z0.size());
    if (q != system.n - system.m)
        throw std::invalid_argument("simulate_sliding: initial state must have reduced dimension");

    const ModePath path =
        sample_mode_path(*system.transitions.true_rates, config.mode0, config.t_final, config.seed);
    const auto steps = static_cast<size_t>(std::ceil(config.t_final / config.dt));
    const double dt = config.dt;

    Trajectory traj;
    History history(config.z0, dt);
    Vector z = config.z0;

    for (size_t k = 0; k <= steps; ++k) {
        const double t = static_cast<double>(k) * dt;
        const int mode = path.mode_at(t);
        const TauForm& tau_fn = system.delays.tau[mode];
        const Matrix& At = sliding[mode].first;
        const Matrix& Adt = sliding[mode].second;

        traj.t.push_back(t);
        traj.mode.push_back(mode);
        traj.z.push_back(z);
        traj.s.push_back(Vector::Zero(0));
        traj.u.push_back(Vector::Zero(0));
        traj.r.push_back(0.0);
        traj.tau.push_back(tau_fn(t));
        if (k == steps) break;

        auto deriv = [&](double ts, const Vector& zs) -> Vector {
            return At * zs + Adt * history.at(ts - tau_fn(ts));
        };
        const Vector k1 = deriv(t, z);
        const Vector k2 = deriv(t + 0.5 * dt, z + 0.5 * dt * k1);
        const Vector k3 = deriv(t + 0.5 * dt, z + 0.5 * dt * k2);
        const Vector k4 = deriv(t + dt, z + dt * k3);
        z += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

        if (!z.allFinite())
            throw std::runtime_error("simulate_sliding: state diverged (non-finite)");
        history.push(z);
    }
    return traj;
}

double empirical_ss_metric(const std::vector<Trajectory>& trajectories) {
    if (trajectories.empty()) throw std::invalid_argument("empirical_ss_metric: no trajectories");
    double acc = 0.0;
    for (const Trajectory& traj : trajectories) {
        double run = 0.0;
        for (size_t k = 0; k + 1 < traj.t.size(); ++k)
            run += traj.z[k].squaredNorm() * (traj.t[k + 1] - traj.t[k]);
        acc += run;
    }
    return acc / static_cast<double>(trajectories.size());
}

std::optional<double> reaching_time_empirical(const Trajectory& trajectory, double tol) {
    std::optional<double> candidate;
    for (size_t k = 0; k < trajectory.t.size(); ++k) {
        if (trajectory.s[k].norm() <= tol) {
            if (!candidate) candidate = trajectory.t[k];
        } else {
            candidate.reset();
        }
    }
    return candidate;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& trajectory) {
    if (trajectory.t.empty()) throw std::invalid_argument("write_trajectory_csv: empty trajectory");
    const auto n = trajectory.z.front().size();
    const auto m = trajectory.s.front().size();
    os << "t,mode";
    for (Eigen::Index i = 0; i < n; ++i) os << ",z" << (i + 1);
    for (Eigen::Index i = 0; i < m; ++i) os << ",s" << (i + 1);
    for (Eigen::Index i = 0; i < m; ++i) os << ",u" << (i + 1);
    os << ",r,tau\n";
    os.precision(12);
    for (size_t k = 0; k < trajectory.t.size(); ++k) {
        os << trajectory.t[k] << ',' << trajectory.mode[k];
        for (Eigen::Index i = 0; i < n; ++i) os << ',' << trajectory.z[k](i);
        for (Eigen::Index i = 0; i < m; ++i) os << ',' << trajectory.s[k](i);
        for (Eigen::Index i = 0; i < m; ++i) os << ',' << trajectory.u[k](i);
        os << ',' << trajectory.r[k] << ',' << trajectory.tau[k] << '\n';
    }
}

}  // namespace mjsmc
