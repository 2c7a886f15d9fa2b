#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <random>
#include <stdexcept>

#include "thermo/stability.hpp"
#include "thermo/thermal_sim.hpp"
#include "support.hpp"

using Catch::Approx;
using namespace thermo;

namespace {

ThermalStateSpace two_by_two() {
    Eigen::MatrixXd a(2, 2);
    a << 0.9, 0.02, 0.03, 0.88;
    Eigen::MatrixXd b(2, 2);
    b << 0.4, 0.05, 0.02, 0.5;
    return ThermalStateSpace(a, b, 0.5, {0, 1});
}

std::vector<SourceParams> constant_sources(int count, double pc_w) {
    SourceParams sp;
    sp.c_sw = 0.0;
    sp.voltage = 1.0;
    sp.frequency = 0.0;
    sp.leakage.i_gate = pc_w;  // V = 1 makes pc_component = pc_w
    sp.leakage.kappa1 = 0.0;
    sp.leakage.kappa2 = -1.0;
    return std::vector<SourceParams>(static_cast<std::size_t>(count), sp);
}

}  // namespace

TEST_CASE("spectral radius estimate agrees with eigenvalues", "[thermal]") {
    SECTION("diagonal matrix is exact") {
        Eigen::MatrixXd d = Eigen::MatrixXd::Zero(3, 3);
        d.diagonal() << 0.3, -0.7, 0.5;
        CHECK(spectral_radius(d) == Approx(0.7).epsilon(1e-9));
    }

    SECTION("rotation-dominated complex pair") {
        Eigen::MatrixXd r(2, 2);
        r << 0.0, 0.9, -0.9, 0.0;
        CHECK(spectral_radius(r) == Approx(0.9).epsilon(1e-9));
    }

    SECTION("random stable matrices vs dense eigensolver") {
        std::mt19937 rng(99);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        for (int trial = 0; trial < 20; ++trial) {
            const int n = 2 + trial % 4;
            Eigen::MatrixXd m(n, n);
            for (int r = 0; r < n; ++r) {
                for (int c = 0; c < n; ++c) m(r, c) = 0.4 * u(rng);
            }
            const double exact = m.eigenvalues().cwiseAbs().maxCoeff();
            if (exact < 1e-6) continue;
            CHECK(spectral_radius(m) == Approx(exact).margin(1e-2 * exact + 1e-9));
        }
    }

    SECTION("nilpotent matrix reports zero") {
        Eigen::MatrixXd nil = Eigen::MatrixXd::Zero(2, 2);
        nil(0, 1) = 1.0;
        CHECK(spectral_radius(nil) == 0.0);
    }
}

TEST_CASE("state space construction validates its invariants", "[thermal]") {
    Eigen::MatrixXd a = Eigen::MatrixXd::Identity(1, 1) * 0.95;
    Eigen::MatrixXd b = Eigen::MatrixXd::Identity(1, 1) * 0.5;

    CHECK_NOTHROW(ThermalStateSpace(a, b, 1.0, {0}));

    SECTION("unstable A is rejected") {
        Eigen::MatrixXd bad = Eigen::MatrixXd::Identity(1, 1) * 1.01;
        CHECK_THROWS_AS(ThermalStateSpace(bad, b, 1.0, {0}), std::invalid_argument);
    }
    SECTION("negative B entries are rejected") {
        Eigen::MatrixXd bad = Eigen::MatrixXd::Identity(1, 1) * -0.5;
        CHECK_THROWS_AS(ThermalStateSpace(a, bad, 1.0, {0}), std::invalid_argument);
    }
    SECTION("map bounds are checked") {
        CHECK_THROWS_AS(ThermalStateSpace(a, b, 1.0, {1}), std::invalid_argument);
        CHECK_THROWS_AS(ThermalStateSpace(a, b, 1.0, {-1}), std::invalid_argument);
        CHECK_THROWS_AS(ThermalStateSpace(a, b, 1.0, {0, 0}), std::invalid_argument);
    }
    SECTION("sample period must be positive") {
        CHECK_THROWS_AS(ThermalStateSpace(a, b, 0.0, {0}), std::invalid_argument);
        CHECK_THROWS_AS(ThermalStateSpace(a, b, -1.0, {0}), std::invalid_argument);
    }
}

TEST_CASE("linear step applies A T + B P", "[thermal]") {
    const ThermalStateSpace model = two_by_two();
    Eigen::VectorXd temp(2);
    temp << 300.0, 300.0;
    Eigen::VectorXd power(2);
    power << 2.0, 1.0;

    const Eigen::VectorXd next = linear_step(model, temp, power);
    CHECK(next[0] == Approx(0.9 * 300.0 + 0.02 * 300.0 + 0.4 * 2.0 + 0.05 * 1.0).margin(1e-12));
    CHECK(next[1] == Approx(0.03 * 300.0 + 0.88 * 300.0 + 0.02 * 2.0 + 0.5 * 1.0).margin(1e-12));

    SECTION("zero state and power stay at zero") {
        const Eigen::VectorXd zero =
            linear_step(model, Eigen::VectorXd::Zero(2), Eigen::VectorXd::Zero(2));
        CHECK(zero.cwiseAbs().maxCoeff() == 0.0);
    }

    SECTION("dimension mismatches are rejected") {
        CHECK_THROWS_AS(linear_step(model, Eigen::VectorXd::Zero(3), power),
                        std::invalid_argument);
        CHECK_THROWS_AS(linear_step(model, temp, Eigen::VectorXd::Zero(1)),
                        std::invalid_argument);
    }
}

TEST_CASE("linear steady state solves (I - A) T = B P", "[thermal]") {
    SECTION("scalar closed form") {
        const ThermalStateSpace model = testsup::reference_model();
        const Eigen::VectorXd t_ss = linear_steady_state(model, testsup::scalar_vec(40.0));
        CHECK(t_ss[0] == Approx(400.0).epsilon(1e-12));
        CHECK(linear_steady_state(model, testsup::scalar_vec(0.0))[0] == 0.0);
    }

    SECTION("fixed point of the linear map") {
        const ThermalStateSpace model = two_by_two();
        Eigen::VectorXd power(2);
        power << 3.0, 5.0;
        const Eigen::VectorXd t_ss = linear_steady_state(model, power);
        const Eigen::VectorXd next = linear_step(model, t_ss, power);
        CHECK((next - t_ss).cwiseAbs().maxCoeff() < 1e-9);
    }
}

TEST_CASE("coupled step draws power at the current temperature", "[thermal]") {
    const ThermalStateSpace model = testsup::reference_model();
    const std::vector<SourceParams> sources{testsup::reference_source()};

    const auto [next, power] = coupled_step(model, sources, testsup::scalar_vec(800.0));
    CHECK(power[0] == Approx(69.430355293715386).epsilon(1e-12));
    CHECK(next[0] == Approx(794.71517764685769).epsilon(1e-12));

    SECTION("stationary at the reference fixed point") {
        const auto [fp_next, fp_power] =
            coupled_step(model, sources, testsup::scalar_vec(testsup::k_ref_temp_stable));
        CHECK(fp_next[0] == Approx(testsup::k_ref_temp_stable).margin(1e-9));
        (void)fp_power;
    }

    SECTION("leakage disabled reduces to the linear map") {
        const std::vector<SourceParams> plain = constant_sources(1, 40.0);
        const auto [lin_next, lin_power] =
            coupled_step(model, plain, testsup::scalar_vec(300.0));
        CHECK(lin_power[0] == 40.0);
        CHECK(lin_next[0] == Approx(0.95 * 300.0 + 0.5 * 40.0).margin(1e-12));
    }

    SECTION("nonpositive temperatures are rejected") {
        CHECK_THROWS_AS(coupled_step(model, sources, testsup::scalar_vec(0.0)),
                        std::invalid_argument);
    }
}

TEST_CASE("simulation converges to the stable fixed point from below", "[thermal]") {
    const ThermalStateSpace model = testsup::reference_model();
    const std::vector<SourceParams> sources{testsup::reference_source()};

    const Trajectory traj = simulate(model, sources, testsup::scalar_vec(300.0), 10000);
    REQUIRE(traj.size() == 10001);
    CHECK_FALSE(traj.runaway);
    CHECK(traj.temps_k.back()[0] == Approx(testsup::k_ref_temp_stable).margin(0.01));

    SECTION("heating from below is monotone") {
        for (std::size_t k = 1; k < traj.size(); ++k) {
            REQUIRE(traj.temps_k[k][0] >= traj.temps_k[k - 1][0]);
        }
    }

    SECTION("one step equals coupled_step exactly") {
        const Trajectory one = simulate(model, sources, testsup::scalar_vec(300.0), 1);
        const auto [next, power] = coupled_step(model, sources, testsup::scalar_vec(300.0));
        REQUIRE(one.size() == 2);
        CHECK(one.temps_k[1][0] == next[0]);
        CHECK(one.powers_w[0][0] == power[0]);
    }

    SECTION("two runs are bit-identical") {
        const Trajectory again = simulate(model, sources, testsup::scalar_vec(300.0), 1000);
        for (std::size_t k = 0; k < again.size(); ++k) {
            REQUIRE(again.temps_k[k][0] == traj.temps_k[k][0]);
        }
    }

    SECTION("times advance by the sample period") {
        CHECK(traj.times_s[0] == 0.0);
        CHECK(traj.times_s[1] == model.sample_period_s());
        CHECK(traj.times_s[100] == Approx(100.0 * model.sample_period_s()).epsilon(1e-12));
    }
}

TEST_CASE("simulation detects thermal runaway", "[thermal]") {
    const ThermalStateSpace model = testsup::reference_model();
    const std::vector<SourceParams> sources{testsup::reference_source()};

    // pc = 60 W puts the reference system past its existence threshold.
    Schedule schedule{{0, 0, 60.0}};
    const Trajectory traj = simulate(model, sources, testsup::scalar_vec(300.0), 200000,
                                     schedule);
    CHECK(traj.runaway);
    CHECK(traj.size() < 200001);
    CHECK(traj.temps_k.back()[0] > 2000.0);

    SECTION("the bound is configurable") {
        SimulateOptions options;
        options.runaway_bound_k = 1200.0;
        const Trajectory low = simulate(model, sources, testsup::scalar_vec(300.0), 200000,
                                        schedule, options);
        CHECK(low.runaway);
        CHECK(low.size() < traj.size());
        CHECK(low.temps_k.back()[0] > 1200.0);
    }
}

TEST_CASE("schedule overrides are persistent per source", "[thermal]") {
    const ThermalStateSpace model = testsup::reference_model();
    const std::vector<SourceParams> sources{testsup::reference_source()};

    Schedule schedule{{5, 0, 10.0}, {10, 0, 20.0}};
    const Trajectory traj = simulate(model, sources, testsup::scalar_vec(300.0), 20, schedule);

    const auto leak = [&](std::size_t k) {
        return subthreshold_power(sources[0], traj.temps_k[k][0]);
    };
    CHECK(traj.powers_w[0][0] == Approx(40.0 + leak(0)).margin(1e-12));
    CHECK(traj.powers_w[4][0] == Approx(40.0 + leak(4)).margin(1e-12));
    CHECK(traj.powers_w[5][0] == Approx(10.0 + leak(5)).margin(1e-12));
    CHECK(traj.powers_w[9][0] == Approx(10.0 + leak(9)).margin(1e-12));
    CHECK(traj.powers_w[10][0] == Approx(20.0 + leak(10)).margin(1e-12));
    CHECK(traj.powers_w[20][0] == Approx(20.0 + leak(20)).margin(1e-12));

    SECTION("schedule validation") {
        CHECK_THROWS_AS(simulate(model, sources, testsup::scalar_vec(300.0), 10,
                                 Schedule{{-1, 0, 5.0}}),
                        std::invalid_argument);
        CHECK_THROWS_AS(simulate(model, sources, testsup::scalar_vec(300.0), 10,
                                 Schedule{{0, 1, 5.0}}),
                        std::invalid_argument);
        CHECK_THROWS_AS(simulate(model, sources, testsup::scalar_vec(300.0), 10,
                                 Schedule{{0, 0, -5.0}}),
                        std::invalid_argument);
    }
}

TEST_CASE("leakage-free simulation settles at the linear steady state", "[thermal]") {
    const ThermalStateSpace model = two_by_two();
    const std::vector<SourceParams> sources = constant_sources(2, 15.0);

    Eigen::VectorXd t0(2);
    t0 << 250.0, 250.0;
    const Trajectory traj = simulate(model, sources, t0, 3000);
    const Eigen::VectorXd expect =
        linear_steady_state(model, Eigen::VectorXd::Constant(2, 15.0));
    CHECK((traj.temps_k.back() - expect).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("monotone heating below the fixed point in coupled systems", "[thermal]") {
    std::mt19937 rng(4242);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 3; ++trial) {
        Eigen::MatrixXd a(2, 2);
        a << 0.85 + 0.05 * u(rng), 0.02 * u(rng), 0.02 * u(rng), 0.85 + 0.05 * u(rng);
        Eigen::MatrixXd b(2, 2);
        b << 0.3 + 0.2 * u(rng), 0.02 * u(rng), 0.02 * u(rng), 0.3 + 0.2 * u(rng);
        const ThermalStateSpace model(a, b, 1.0, {0, 1});

        SourceParams sp = testsup::reference_source();
        sp.c_sw = 2e-8;  // 20 W steady, comfortably stable
        const std::vector<SourceParams> sources(2, sp);

        const Trajectory settle =
            simulate(model, sources, Eigen::VectorXd::Constant(2, 100.0), 5000);
        REQUIRE_FALSE(settle.runaway);
        const Eigen::VectorXd fp = settle.temps_k.back();

        const Trajectory traj = simulate(model, sources, 0.5 * fp, 2000);
        for (std::size_t k = 1; k < traj.size(); ++k) {
            for (int i = 0; i < 2; ++i) {
                REQUIRE(traj.temps_k[k][i] >= traj.temps_k[k - 1][i] - 1e-12);
            }
        }
    }
}

TEST_CASE("ambient-referenced models settle at ambient under zero power", "[thermal]") {
    Eigen::MatrixXd a(1, 1);
    a << 0.9;
    Eigen::MatrixXd b(1, 1);
    b << 0.5;
    const auto model = ThermalStateSpace::ambient_referenced(a, b, 1.0, {0}, 300.0);

    SECTION("linear steady state at zero power is ambient") {
        CHECK(linear_steady_state(model, testsup::scalar_vec(0.0))[0] ==
              Approx(300.0).epsilon(1e-12));
    }

    SECTION("simulation relaxes to ambient") {
        const std::vector<SourceParams> sources = constant_sources(1, 0.0);
        const Trajectory traj = simulate(model, sources, testsup::scalar_vec(350.0), 400);
        CHECK(traj.temps_k.back()[0] == Approx(300.0).margin(1e-6));
    }

    SECTION("steps must be at least one") {
        const std::vector<SourceParams> sources = constant_sources(1, 0.0);
        CHECK_THROWS_AS(simulate(model, sources, testsup::scalar_vec(350.0), 0),
                        std::invalid_argument);
    }
}
