#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "thermo/errors.hpp"
#include "thermo/safety.hpp"
#include "thermo/stability.hpp"
#include "thermo/thermal_sim.hpp"
#include "support.hpp"

using Catch::Approx;
using namespace thermo;

namespace {

// Synthetic single-hotspot cooling record T(k) = t_fix - gap * exp(-k dt / tau).
Trajectory exponential_trace(double t_fix, double gap, double tau, double dt, int rows) {
    Trajectory traj;
    traj.times_s.reserve(static_cast<size_t>(rows));
    traj.temps_k.reserve(static_cast<size_t>(rows));
    traj.powers_w.reserve(static_cast<size_t>(rows));
    for (int k = 0; k < rows; ++k) {
        const double t = k * dt;
        traj.times_s.push_back(t);
        traj.temps_k.push_back(testsup::scalar_vec(t_fix - gap * std::exp(-t / tau)));
        traj.powers_w.push_back(testsup::scalar_vec(0.0));
    }
    return traj;
}

}  // namespace

TEST_CASE("largest safe power for a target ceiling", "[safety]") {
    const SisoParams siso = testsup::reference_siso();
    const LeakageParams lp = testsup::reference_leakage();

    SECTION("the stable temperature of the reference point is reproduced") {
        const SafePowerResult r =
            safe_power(testsup::k_ref_temp_stable, siso, testsup::k_ref_voltage, lp);
        CHECK(r.pc_star_w == Approx(testsup::k_ref_pc).epsilon(1e-9));
        CHECK(r.alpha_star == Approx(testsup::k_ref_alpha).epsilon(1e-9));
        CHECK(r.t_tilde_star == Approx(testsup::k_ref_t_tilde_s).epsilon(1e-12));
    }

    SECTION("round trip through the stability analysis") {
        for (double target : {350.0, 420.0, 500.0, 600.0, 700.0}) {
            const SafePowerResult r = safe_power(target, siso, testsup::k_ref_voltage, lp);
            REQUIRE(r.pc_star_w > 0.0);
            const StabilityReport rep = analyze(siso, r.pc_star_w, testsup::k_ref_voltage, lp);
            REQUIRE(rep.stable());
            const auto& fixed = std::get<FixedPointsOutcome>(rep.outcome);
            CHECK(fixed.temp_stable_k == Approx(target).epsilon(1e-7));
        }
    }

    SECTION("strictly increasing in the target temperature") {
        double prev = 0.0;
        for (double target = 320.0; target <= 740.0; target += 30.0) {
            const double pc = safe_power(target, siso, testsup::k_ref_voltage, lp).pc_star_w;
            REQUIRE(pc > prev);
            prev = pc;
        }
    }

    SECTION("running at the safe power never exceeds the ceiling") {
        const double target = 500.0;
        const double pc = safe_power(target, siso, testsup::k_ref_voltage, lp).pc_star_w;
        SourceParams sp = testsup::reference_source();
        sp.c_sw = 0.0;
        sp.leakage.i_gate = pc / sp.voltage;  // pc_component == pc exactly
        const Trajectory traj =
            simulate(testsup::reference_model(), {sp}, testsup::scalar_vec(300.0), 6000);
        REQUIRE_FALSE(traj.runaway);
        double peak = 0.0;
        for (const auto& row : traj.temps_k) peak = std::max(peak, row[0]);
        CHECK(peak <= target + 1e-6);
        CHECK(traj.temps_k.back()[0] == Approx(target).margin(1e-6));
    }

    SECTION("targets past the tangency point are rejected") {
        try {
            (void)safe_power(800.0, siso, testsup::k_ref_voltage, lp);
            FAIL("expected UnreachableTemperatureError");
        } catch (const UnreachableTemperatureError& e) {
            CHECK(e.reason() == UnreachableTemperatureError::Reason::beyond_tangency);
        }
    }

    SECTION("targets past the zero-power fixed point are rejected") {
        try {
            (void)safe_power(1500.0, siso, testsup::k_ref_voltage, lp);
            FAIL("expected UnreachableTemperatureError");
        } catch (const UnreachableTemperatureError& e) {
            CHECK(e.reason() == UnreachableTemperatureError::Reason::below_zero_power_fixed_point);
        }
    }

    SECTION("cold ceilings approach the leakage-free linear power from below") {
        const SafePowerResult r = safe_power(100.0, siso, testsup::k_ref_voltage, lp);
        CHECK(r.pc_star_w > 0.0);
        CHECK(r.pc_star_w < 10.0);  // (1 - a) T* / b, the no-leakage budget
        CHECK(r.pc_star_w == Approx(10.0).epsilon(1e-4));
    }

    SECTION("input validation") {
        CHECK_THROWS_AS(safe_power(0.0, siso, testsup::k_ref_voltage, lp),
                        std::invalid_argument);
        CHECK_THROWS_AS(safe_power(-10.0, siso, testsup::k_ref_voltage, lp),
                        std::invalid_argument);
    }
}

TEST_CASE("time constant from a recorded transient", "[safety]") {
    SECTION("exact on a noiseless exponential") {
        const Trajectory traj = exponential_trace(340.0, 40.0, 30.0, 1.0, 21);
        // frozen spot values of the synthetic trace
        CHECK(traj.temps_k[10][0] == Approx(311.33874757704843).epsilon(1e-15));
        CHECK(traj.temps_k[20][0] == Approx(319.46331523869632).epsilon(1e-15));
        CHECK(estimate_tau(traj, 0, 340.0, 10) == Approx(30.0).epsilon(1e-12));
    }

    SECTION("gap choice does not matter on clean data") {
        const Trajectory traj = exponential_trace(340.0, 40.0, 30.0, 1.0, 40);
        for (int d : {1, 5, 10, 25}) {
            CHECK(estimate_tau(traj, 0, 340.0, d) == Approx(30.0).epsilon(1e-10));
        }
    }

    SECTION("works on heating traces approaching from above as well") {
        const Trajectory traj = exponential_trace(300.0, -55.0, 12.5, 0.25, 80);
        CHECK(estimate_tau(traj, 0, 300.0, 10) == Approx(12.5).epsilon(1e-10));
    }

    SECTION("recovers tau from a simulated linear cooldown") {
        // leakage-free scalar model: T[k+1] = a T[k], tau = -dt / ln(a)
        Eigen::MatrixXd a = Eigen::MatrixXd::Constant(1, 1, 0.9);
        Eigen::MatrixXd b = Eigen::MatrixXd::Constant(1, 1, 0.5);
        const ThermalStateSpace model(a, b, 2.0, {0});
        SourceParams sp = testsup::reference_source();
        sp.c_sw = 0.0;
        sp.leakage.i_gate = 0.0;
        sp.leakage.kappa1 = 0.0;
        const Trajectory traj = simulate(model, {sp}, testsup::scalar_vec(400.0), 50);
        const double tau = estimate_tau(traj, 0, 0.0, 10);
        CHECK(tau == Approx(-2.0 / std::log(0.9)).epsilon(1e-9));
    }

    SECTION("median error under noise stays small") {
        std::mt19937 rng(77);
        std::normal_distribution<double> noise(0.0, 0.05);
        std::vector<double> errors;
        for (int mc = 0; mc < 200; ++mc) {
            Trajectory traj = exponential_trace(340.0, 40.0, 30.0, 1.0, 31);
            for (auto& row : traj.temps_k) row[0] += noise(rng);
            try {
                const double tau = estimate_tau(traj, 0, 340.0, 15);
                errors.push_back(std::abs(tau - 30.0) / 30.0);
            } catch (const EstimationUndefinedError&) {
                // a noisy pair can be non-shrinking; that draw carries no estimate
            }
        }
        REQUIRE(errors.size() > 150);
        std::sort(errors.begin(), errors.end());
        CHECK(errors[errors.size() / 2] < 0.10);
    }

    SECTION("error paths") {
        const Trajectory traj = exponential_trace(340.0, 40.0, 30.0, 1.0, 21);
        // not enough rows for the requested gap
        CHECK_THROWS_AS(estimate_tau(traj, 0, 340.0, 21), std::invalid_argument);
        CHECK_THROWS_AS(estimate_tau(traj, 0, 340.0, 0), std::invalid_argument);
        CHECK_THROWS_AS(estimate_tau(traj, 1, 340.0, 10), std::invalid_argument);

        // fixed point between the two samples: opposite signs
        CHECK_THROWS_AS(estimate_tau(traj, 0, 315.0, 10), EstimationUndefinedError);
        // moving away from the claimed fixed point
        CHECK_THROWS_AS(estimate_tau(traj, 0, 290.0, 10), EstimationUndefinedError);
        // sitting exactly on it
        Trajectory flat = exponential_trace(340.0, 0.0, 30.0, 1.0, 21);
        CHECK_THROWS_AS(estimate_tau(flat, 0, 340.0, 10), EstimationUndefinedError);
    }
}

TEST_CASE("projected time to reach a band around the fixed point", "[safety]") {
    SECTION("frozen value") {
        CHECK(time_to_fixed_point(300.0, 340.0, 30.0, 0.4) ==
              Approx(138.15510557964274).epsilon(1e-12));
    }

    SECTION("halving law: one time constant per factor e, ln 2 per halving") {
        const double base = time_to_fixed_point(300.0, 340.0, 30.0, 0.4);
        const double half = time_to_fixed_point(320.0, 340.0, 30.0, 0.4);
        CHECK(base - half == Approx(30.0 * std::log(2.0)).epsilon(1e-12));
        CHECK(30.0 * std::log(2.0) == Approx(20.794415416798359).epsilon(1e-15));
    }

    SECTION("already inside the band clamps to zero") {
        CHECK(time_to_fixed_point(339.8, 340.0, 30.0, 0.4) == 0.0);
        CHECK(time_to_fixed_point(340.0, 340.0, 30.0, 0.4) == 0.0);
        CHECK(time_to_fixed_point(340.3, 340.0, 30.0, 0.4) == 0.0);
    }

    SECTION("approach side does not matter, only the gap") {
        CHECK(time_to_fixed_point(360.0, 340.0, 30.0, 0.4) ==
              Approx(time_to_fixed_point(320.0, 340.0, 30.0, 0.4)).epsilon(1e-15));
    }

    SECTION("consistency with the estimator on a synthetic trace") {
        const double tau = 30.0;
        const Trajectory traj = exponential_trace(340.0, 40.0, tau, 1.0, 21);
        const double tau_hat = estimate_tau(traj, 0, 340.0, 10);
        const double t_now = traj.temps_k.back()[0];
        const double remaining = time_to_fixed_point(t_now, 340.0, tau_hat, 0.4);
        // the trace itself reaches the band when gap * exp(-t/tau) = 0.4
        const double truth = tau * std::log(40.0 / 0.4) - traj.times_s.back();
        CHECK(remaining == Approx(truth).epsilon(1e-9));
    }

    SECTION("input validation") {
        CHECK_THROWS_AS(time_to_fixed_point(300.0, 340.0, 0.0, 0.4), std::invalid_argument);
        CHECK_THROWS_AS(time_to_fixed_point(300.0, 340.0, -1.0, 0.4), std::invalid_argument);
        CHECK_THROWS_AS(time_to_fixed_point(300.0, 340.0, 30.0, 0.0), std::invalid_argument);
    }
}
