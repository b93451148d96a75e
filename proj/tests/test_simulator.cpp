#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "mjsmc/fixtures.hpp"
#include "mjsmc/simulator.hpp"

using namespace mjsmc;

namespace {

/// Single-mode system with one reduced state and a constant delay tau.
MjlsSystem frozen_scalar_system(double tau) {
    MjlsSystem sys;
    sys.n = 2;
    sys.m = 1;
    ModeData md;
    md.A = Matrix::Zero(2, 2);
    md.Ad = Matrix::Zero(2, 2);
    md.B = (Matrix(2, 1) << 0, 1).finished();
    sys.modes.push_back(md);
    sys.delays.h1i = {tau};
    sys.delays.h2i = {tau};
    sys.delays.mui = {0.0};
    sys.delays.tau = {TauForm{TauForm::Shape::Sin, tau, 0.0, 0.0}};
    sys.transitions.N = 1;
    sys.transitions.entries = {{0.0}};
    sys.transitions.true_rates = Matrix::Zero(1, 1);
    return sys;
}

SimConfig sliding_config(double t_final, double dt, int seed, double z0) {
    SimConfig cfg;
    cfg.t_final = t_final;
    cfg.dt = dt;
    cfg.seed = seed;
    cfg.z0 = Vector::Constant(1, z0);
    return cfg;
}

}  // namespace

TEST_CASE("mode_at picks the last jump at or before t") {
    ModePath path;
    path.jump_times = {0.0, 1.5, 3.0};
    path.modes = {0, 2, 1};
    CHECK(path.mode_at(0.0) == 0);
    CHECK(path.mode_at(1.49) == 0);
    CHECK(path.mode_at(1.5) == 2);
    CHECK(path.mode_at(2.999) == 2);
    CHECK(path.mode_at(100.0) == 1);
}

TEST_CASE("single-mode chain never jumps") {
    const ModePath path = sample_mode_path(Matrix::Zero(1, 1), 0, 50.0, 7);
    CHECK(path.jump_times == std::vector<double>{0.0});
    CHECK(path.modes == std::vector<int>{0});
}

TEST_CASE("symmetric two-mode chain has unit mean holding times") {
    Matrix rates(2, 2);
    rates << -1, 1, 1, -1;
    const ModePath path = sample_mode_path(rates, 0, 1e4, 12345);
    REQUIRE(path.jump_times.size() > 1000);
    double mean = 0.0;
    for (size_t k = 1; k < path.jump_times.size(); ++k)
        mean += path.jump_times[k] - path.jump_times[k - 1];
    mean /= static_cast<double>(path.jump_times.size() - 1);
    CHECK(mean == doctest::Approx(1.0).epsilon(0.05));
    for (size_t k = 1; k < path.modes.size(); ++k) CHECK(path.modes[k] != path.modes[k - 1]);
}

TEST_CASE("mode paths are reproducible by seed") {
    const Matrix rates = *three_mode_benchmark().transitions.true_rates;
    const ModePath a = sample_mode_path(rates, 0, 100.0, 42);
    const ModePath b = sample_mode_path(rates, 0, 100.0, 42);
    CHECK(a.jump_times == b.jump_times);
    CHECK(a.modes == b.modes);
    const ModePath c = sample_mode_path(rates, 0, 100.0, 43);
    CHECK(a.jump_times != c.jump_times);
}

TEST_CASE("history interpolation is exact while the solution is piecewise affine") {
    // z' = z(t - tau) with constant pre-history 1 has the method-of-steps
    // solution z(t) = sum_k (t - (k-1) tau)^k / k! on [(n-1) tau, n tau].
    // While the read-back history is affine (first two segments) the grid
    // solution must be exact to rounding; afterwards only O(dt^2) holds.
    const double tau = 1.0 / 3.0;
    const double dt = 0.01;  // deliberately incommensurate with tau
    const MjlsSystem sys = frozen_scalar_system(tau);
    const std::vector<std::pair<Matrix, Matrix>> sliding = {
        {Matrix::Zero(1, 1), Matrix::Identity(1, 1)}};
    const Trajectory traj = simulate_sliding(sys, sliding, sliding_config(1.2, dt, 0, 1.0));

    // Terms k = 0..n for t in [(n-1) tau, n tau].
    auto exact = [&](double t) {
        const int n = static_cast<int>(std::floor(t / tau)) + 1;
        double acc = 0.0;
        for (int k = 0; k <= n; ++k) {
            const double base = t - (k - 1) * tau;
            if (base <= 0.0) continue;
            acc += std::pow(base, k) / std::tgamma(k + 1.0);
        }
        return acc;
    };
    for (size_t k = 0; k < traj.t.size(); ++k) {
        const double t = traj.t[k];
        const double ref = exact(t);
        if (t <= 2.0 * tau + 1e-12)
            CHECK(std::abs(traj.z[k](0) - ref) <= 1e-12);
        else
            CHECK(std::abs(traj.z[k](0) - ref) <= 1e-3);
    }
}

TEST_CASE("step halving changes the frozen-mode solution by less than 1e-4") {
    // Reduced closed-loop scalar dynamics held in one mode with the
    // benchmark's sinusoidal delay.
    MjlsSystem sys = frozen_scalar_system(0.4);
    sys.delays.tau = {TauForm{TauForm::Shape::Sin, 0.4, 0.1, 5.0}};
    sys.delays.h1i = {0.3};
    sys.delays.h2i = {0.5};
    const std::vector<std::pair<Matrix, Matrix>> sliding = {
        {Matrix::Constant(1, 1, -1.6668), Matrix::Constant(1, 1, -0.9167)}};

    const double dt = 1e-3;
    const Trajectory coarse = simulate_sliding(sys, sliding, sliding_config(10.0, dt, 0, 1.0));
    const Trajectory fine = simulate_sliding(sys, sliding, sliding_config(10.0, dt / 2, 0, 1.0));
    REQUIRE(fine.t.size() == 2 * coarse.t.size() - 1);
    double sup = 0.0;
    for (size_t k = 0; k < coarse.t.size(); ++k)
        sup = std::max(sup, std::abs(coarse.z[k](0) - fine.z[2 * k](0)));
    CHECK(sup < 1e-4);

    // Contractive dynamics: the state decays toward zero.
    const Trajectory longrun = simulate_sliding(sys, sliding, sliding_config(20.0, dt, 0, 1.0));
    CHECK(std::abs(longrun.z.back()(0)) < 1e-3);
}

TEST_CASE("ss metric: analytic exponential value") {
    MjlsSystem sys = frozen_scalar_system(0.4);
    // z' = -z (no delayed term): z = e^{-t}, integral of z^2 = 1/2.
    const std::vector<std::pair<Matrix, Matrix>> sliding = {
        {Matrix::Constant(1, 1, -1.0), Matrix::Zero(1, 1)}};
    const Trajectory traj = simulate_sliding(sys, sliding, sliding_config(10.0, 1e-3, 0, 1.0));
    CHECK(empirical_ss_metric({traj}) == doctest::Approx(0.5).epsilon(0.02));

    Trajectory zero = traj;
    for (Vector& z : zero.z) z.setZero();
    CHECK(empirical_ss_metric({zero}) == 0.0);
    CHECK_THROWS_AS(empirical_ss_metric({}), std::invalid_argument);
}

TEST_CASE("empirical reaching time on synthetic surface histories") {
    Trajectory traj;
    const double dt = 0.01;
    for (int k = 0; k <= 200; ++k) {
        const double t = k * dt;
        traj.t.push_back(t);
        traj.mode.push_back(0);
        traj.z.push_back(Vector::Zero(1));
        traj.s.push_back(Vector::Constant(1, std::max(1.0 - t, 0.0)));
        traj.u.push_back(Vector::Zero(1));
        traj.r.push_back(0.0);
        traj.tau.push_back(0.0);
    }
    const auto hit = reaching_time_empirical(traj, 0.02);
    REQUIRE(hit.has_value());
    CHECK(*hit == doctest::Approx(0.98).epsilon(0.02));

    for (Vector& s : traj.s) s.setZero();
    CHECK(*reaching_time_empirical(traj, 0.02) == 0.0);

    for (Vector& s : traj.s) s.setConstant(1.0);
    CHECK_FALSE(reaching_time_empirical(traj, 0.02).has_value());
}

TEST_CASE("closed loop holds the origin with no disturbance") {
    const MjlsSystem sys = three_mode_benchmark();
    ControllerGains gains;
    gains.variant = ControllerVariant::KnownDelay;
    SurfaceRealization realization;
    for (int i = 0; i < 3; ++i) {
        gains.Omega.push_back(Matrix::Identity(1, 1));
        gains.coupling.push_back(Matrix::Identity(1, 1));
        gains.epsilon.push_back(0.2);
        gains.f.push_back(0.1);
        realization.C1.push_back(Matrix::Constant(1, 1, 0.5));
        realization.C2.push_back(Matrix::Identity(1, 1));
    }
    SimConfig cfg;
    cfg.t_final = 2.0;
    cfg.dt = 1e-2;
    cfg.z0 = Vector::Zero(2);
    cfg.disturbance.amplitude = 0.0;
    const Trajectory traj = simulate(sys, gains, realization, cfg);
    for (size_t k = 0; k < traj.t.size(); ++k) {
        CHECK(traj.z[k].norm() == 0.0);
        CHECK(traj.u[k].norm() == 0.0);
    }
}

TEST_CASE("trajectories are bit-identical under the same seed") {
    const MjlsSystem sys = three_mode_benchmark();
    ControllerGains gains;
    gains.variant = ControllerVariant::Adaptive;
    gains.beta = 2.0;
    SurfaceRealization realization;
    for (int i = 0; i < 3; ++i) {
        gains.Omega.push_back(Matrix::Identity(1, 1));
        gains.coupling.push_back(Matrix::Identity(1, 1));
        gains.epsilon.push_back(0.2);
        gains.f.push_back(0.1);
        realization.C1.push_back(Matrix::Constant(1, 1, 0.5));
        realization.C2.push_back(Matrix::Identity(1, 1));
    }
    SimConfig cfg;
    cfg.t_final = 3.0;
    cfg.dt = 1e-2;
    cfg.seed = 99;
    cfg.z0 = (Vector(2) << 1, 1).finished();
    cfg.variant = ControllerVariant::Adaptive;

    const Trajectory a = simulate(sys, gains, realization, cfg);
    const Trajectory b = simulate(sys, gains, realization, cfg);
    REQUIRE(a.t.size() == b.t.size());
    for (size_t k = 0; k < a.t.size(); ++k) {
        CHECK(a.mode[k] == b.mode[k]);
        CHECK((a.z[k] - b.z[k]).norm() == 0.0);
        CHECK(a.r[k] == b.r[k]);
    }

    // Adaptive estimate starts at zero and never decreases.
    CHECK(a.r.front() == 0.0);
    for (size_t k = 1; k < a.r.size(); ++k) CHECK(a.r[k] >= a.r[k - 1]);
}

TEST_CASE("csv export shape") {
    Trajectory traj;
    traj.t = {0.0, 0.1};
    traj.mode = {0, 1};
    traj.z = {(Vector(2) << 1, 2).finished(), (Vector(2) << 3, 4).finished()};
    traj.s = {Vector::Constant(1, 0.5), Vector::Constant(1, -0.5)};
    traj.u = {Vector::Constant(1, 0.1), Vector::Constant(1, 0.2)};
    traj.r = {0.0, 0.0};
    traj.tau = {0.4, 0.41};
    std::ostringstream os;
    write_trajectory_csv(os, traj);
    std::istringstream in(os.str());
    std::string header;
    std::getline(in, header);
    CHECK(header == "t,mode,z1,z2,s1,u1,r,tau");
    int rows = 0;
    std::string line;
    while (std::getline(in, line))
        if (!line.empty()) ++rows;
    CHECK(rows == 2);
}

TEST_CASE("invalid configurations are rejected") {
    const MjlsSystem sys = three_mode_benchmark();
    ControllerGains gains;
    gains.variant = ControllerVariant::KnownDelay;
    SurfaceRealization realization;
    for (int i = 0; i < 3; ++i) {
        gains.Omega.push_back(Matrix::Identity(1, 1));
        gains.coupling.push_back(Matrix::Identity(1, 1));
        gains.epsilon.push_back(0.2);
        gains.f.push_back(0.1);
        realization.C1.push_back(Matrix::Zero(1, 1));
        realization.C2.push_back(Matrix::Identity(1, 1));
    }
    SimConfig cfg;
    cfg.z0 = Vector::Zero(3);  // wrong dimension
    CHECK_THROWS_AS(simulate(sys, gains, realization, cfg), std::invalid_argument);

    MjlsSystem no_rates = sys;
    no_rates.transitions.true_rates.reset();
    cfg.z0 = Vector::Zero(2);
    CHECK_THROWS_AS(simulate(no_rates, gains, realization, cfg), std::invalid_argument);
}
