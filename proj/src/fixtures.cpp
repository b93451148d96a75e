#include "mjsmc/fixtures.hpp"

namespace mjsmc {

MjlsSystem three_mode_benchmark() {
    MjlsSystem sys;
    sys.n = 2;
    sys.m = 1;

    ModeData m1;
    m1.A = (Matrix(2, 2) << -1.0, 0.0, 2.0, -2.0).finished();
    m1.Ad = (Matrix(2, 2) << -2.0, 0.1, 0.5, -1.0).finished();
    m1.B = (Matrix(2, 1) << 1.0, 0.0).finished();
    m1.f = 0.1;

    ModeData m2;
    m2.A = (Matrix(2, 2) << -0.15, -0.49, 1.5, -2.1).finished();
    m2.Ad = (Matrix(2, 2) << 0.0, -3.0, 0.1, 0.5).finished();
    m2.B = (Matrix(2, 1) << 2.0, -1.0).finished();
    m2.f = 0.1;

    ModeData m3;
    m3.A = (Matrix(2, 2) << -0.3, -0.15, 1.5, -1.8).finished();
    m3.Ad = (Matrix(2, 2) << -0.5, 0.2, 0.1, -0.3).finished();
    m3.B = (Matrix(2, 1) << 1.0, -1.0).finished();
    m3.f = 0.1;

    sys.modes = {m1, m2, m3};

    sys.delays.tau = {{TauForm::Shape::Sin, 0.40, 0.10, 5.0},
                      {TauForm::Shape::Sin, 0.45, 0.05, 6.0},
                      {TauForm::Shape::Cos, 0.42, 0.07, 11.0}};
    sys.delays.h1i = {0.30, 0.40, 0.35};
    sys.delays.h2i = {0.50, 0.50, 0.49};
    sys.delays.mui = {0.6, 0.4, 1.1};

    sys.transitions.N = 3;
    sys.transitions.entries = {
        {std::nullopt, std::nullopt, 1.1},
        {0.2, std::nullopt, std::nullopt},
        {0.9, 0.2, -1.1},
    };
    // Consistent completion of the masked entries; only the simulator uses it.
    sys.transitions.true_rates = (Matrix(3, 3) << -1.3, 0.2, 1.1,
                                                   0.2, -0.5, 0.3,
                                                   0.9, 0.2, -1.1).finished();
    return sys;
}

}  // namespace mjsmc
