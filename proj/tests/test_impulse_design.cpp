#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "impulseq/erlang_fluid.hpp"
#include "impulseq/impulse_design.hpp"
#include "impulseq/numeric_oracle.hpp"

using namespace impulseq;
using Catch::Approx;

namespace {

struct Setup {
    const char* name;
    QueueParams p;
    double q0;
    double T;
};

const std::vector<Setup> kSetups = {
    {"over/over a", {10, 1, 2, 2}, 3, 5},      {"over/over b", {10, 2, 3, 4}, 6, 5},
    {"under/over T=4", {10, 1, 2, 2}, 1, 4},   {"under/over T=0.35", {10, 1, 2, 2}, 1, 0.35},
    {"under/over T=0.2", {10, 1, 2, 2}, 1, 0.2}, {"over/under q0=5", {9, 5, 2, 2}, 5, 2},
    {"over/under T=0.15", {9, 5, 2, 2}, 5, 0.15}, {"over/under q0=3", {9, 5, 2, 2}, 3, 2},
    {"under/under T=1.5", {9, 5, 2, 2}, 1, 1.5}, {"under/under T=0.5", {9, 5, 2, 2}, 1, 0.5},
};

const QueueParams kLinear{10, 1, 0, 2};

double central_difference(const Setup& s, double tau, double m, Dynamics dyn, double h = 1e-6) {
    return (average_queue_length(s.p, s.q0, s.T, tau + h, m, dyn) -
            average_queue_length(s.p, s.q0, s.T, tau - h, m, dyn)) /
           (2 * h);
}

}  // namespace

TEST_CASE("average_queue_length, linear") {
    CHECK(average_queue_length(kLinear, 0, 4, 2, 0.5, Dynamics::Linear) == Approx(6.6112327567024494).epsilon(1e-14));
    const double flat = average_queue_length(kLinear, 3, 4, 0, 1.0, Dynamics::Linear);
    for (double tau : {0.5, 1.7, 4.0}) {
        CHECK(average_queue_length(kLinear, 3, 4, tau, 1.0, Dynamics::Linear) == Approx(flat).epsilon(1e-13));
    }
    CHECK(average_queue_length({9, 5, 2, 2}, 1.8, 3, 1, 1.0, Dynamics::ErlangA) == Approx(1.8).epsilon(1e-14));
    CHECK_THROWS_AS(average_queue_length(kLinear, 0, 4, 5, 0.5, Dynamics::Linear), DomainError);
    CHECK_THROWS_AS(average_queue_length(kLinear, 0, 0, 0, 0.5, Dynamics::Linear), ParameterError);
}

TEST_CASE("average_queue_length matches the integrated trajectory") {
    for (const auto& s : kSetups) {
        for (double frac : {0.0, 0.3, 0.77, 1.0}) {
            const double tau = frac * s.T;
            const Trajectory traj = integrate_impulsive(s.p, s.q0, ImpulseSpec{0.5, Single{tau}}, s.T);
            INFO(s.name << " tau=" << tau);
            CHECK(trajectory_average(traj, 0, s.T) ==
                  Approx(average_queue_length(s.p, s.q0, s.T, tau, 0.5, Dynamics::ErlangA)).epsilon(1e-5));
        }
    }
}

TEST_CASE("derivative_average, linear") {
    CHECK(derivative_average(kLinear, 0, 4, 1, 0.5, Dynamics::Linear) == Approx(-0.39761546600447297).epsilon(1e-12));
    // closed form (1-m)[(q0-xi) e^{-mu tau} + xi e^{-mu (T-tau)}] / T
    for (double q0 : {0.0, 5.0, 12.0}) {
        for (double tau : {0.1, 1.0, 2.5, 3.9}) {
            const double expect = 0.5 * ((q0 - 10) * std::exp(-tau) + 10 * std::exp(-(4 - tau))) / 4;
            CHECK(derivative_average(kLinear, q0, 4, tau, 0.5, Dynamics::Linear) == Approx(expect).margin(1e-13));
        }
    }
}

TEST_CASE("linear derivative is positive when starting above the fixed point") {
    for (int i = 0; i <= 100; ++i) {
        CHECK(derivative_average(kLinear, 12, 4, 4.0 * i / 100, 0.5, Dynamics::Linear) > 0);
    }
}

TEST_CASE("derivative_average matches finite differences on every sub-interval") {
    std::mt19937_64 rng(20240917);
    for (const auto& s : kSetups) {
        for (const auto& piece : erlang_subintervals(s.p, s.q0, s.T, 0.5)) {
            const double width = piece.hi - piece.lo;
            const double h = std::min(1e-6, width * 1e-3);
            std::uniform_real_distribution<double> u(piece.lo + 2 * h, piece.hi - 2 * h);
            for (int k = 0; k < 100; ++k) {
                const double tau = u(rng);
                INFO(s.name << " " << piece.label() << " tau=" << tau);
                CHECK(derivative_average(s.p, s.q0, s.T, tau, 0.5, Dynamics::ErlangA) ==
                      Approx(central_difference(s, tau, 0.5, Dynamics::ErlangA, h)).margin(1e-5));
            }
        }
    }
}

TEST_CASE("derivative_average refuses interior sub-interval boundaries") {
    const QueueParams p{10, 1, 2, 2};
    const auto pieces = erlang_subintervals(p, 3, 5, 0.5);
    REQUIRE(pieces.size() == 2);
    CHECK_THROWS_AS(derivative_average(p, 3, 5, pieces[1].lo, 0.5, Dynamics::ErlangA), BoundaryError);
    CHECK_NOTHROW(derivative_average(p, 3, 5, 0.0, 0.5, Dynamics::ErlangA));
    CHECK_NOTHROW(derivative_average(p, 3, 5, 5.0, 0.5, Dynamics::ErlangA));
}

TEST_CASE("erlang_subintervals") {
    SECTION("over/over, rising start") {
        const auto pieces = erlang_subintervals({10, 1, 2, 2}, 3, 5, 0.5);
        REQUIRE(pieces.size() == 2);
        CHECK(pieces[0].label() == "I_{1,2}");
        CHECK(pieces[0].solver == SolverKind::Numeric);
        CHECK(pieces[0].hi == Approx(std::log(1.5) / 2).epsilon(1e-14));
        CHECK(pieces[1].label() == "I_{1,1}");
        CHECK(pieces[1].solver == SolverKind::Analytic);
    }
    SECTION("under/over horizons") {
        auto pieces = erlang_subintervals({10, 1, 2, 2}, 1, 4, 0.5);
        REQUIRE(pieces.size() == 3);
        CHECK(pieces[0].label() == "I_{2,1}");
        CHECK(pieces[0].hi == Approx(0.11778303565638346).epsilon(1e-14));
        CHECK(pieces[1].label() == "I_{2,2}");
        // pre-impulse level reaches c/m = 4 only after the crossing, on the theta branch
        const double b = 0.11778303565638346 + std::log((2.0 - 6.0) / (4.0 - 6.0)) / 2;
        CHECK(pieces[1].hi == Approx(b).epsilon(1e-13));
        CHECK(pieces[2].label() == "I_{2,3}");

        pieces = erlang_subintervals({10, 1, 2, 2}, 1, 0.35, 0.5);
        REQUIRE(pieces.size() == 2);
        CHECK(pieces[1].label() == "I_{2,4}");
        CHECK(pieces[1].solver == SolverKind::Numeric);

        pieces = erlang_subintervals({10, 1, 2, 2}, 1, 0.1, 0.5);
        REQUIRE(pieces.size() == 1);
        CHECK(pieces[0].label() == "I_{2,5}");
    }
    SECTION("over/under") {
        auto pieces = erlang_subintervals({9, 5, 2, 2}, 5, 2, 0.5);
        REQUIRE(pieces.size() == 3);
        CHECK(pieces[0].label() == "I_{3,1}");
        CHECK(pieces[1].label() == "I_{3,2}");
        CHECK(pieces[2].label() == "I_{3,3}");
        CHECK(pieces[1].hi == Approx(std::log(7.0) / 2).epsilon(1e-14));

        pieces = erlang_subintervals({9, 5, 2, 2}, 5, 0.15, 0.5);
        REQUIRE(pieces.size() == 1);
        CHECK(pieces[0].label() == "I_{3,4}");

        // q0 <= c/m: the first piece vanishes
        pieces = erlang_subintervals({9, 5, 2, 2}, 3, 2, 0.5);
        REQUIRE(pieces.size() == 2);
        CHECK(pieces[0].label() == "I_{3,2}");
        CHECK(pieces[0].lo == 0.0);
    }
    SECTION("under/under") {
        const auto pieces = erlang_subintervals({9, 5, 2, 2}, 1, 1.5, 0.5);
        REQUIRE(pieces.size() == 1);
        CHECK(pieces[0].label() == "I_{4,1}");
        CHECK(pieces[0].solver == SolverKind::Analytic);
    }
}

TEST_CASE("sub-intervals tile [0, T]") {
    for (const auto& s : kSetups) {
        const auto pieces = erlang_subintervals(s.p, s.q0, s.T, 0.5);
        INFO(s.name);
        REQUIRE_FALSE(pieces.empty());
        CHECK(pieces.front().lo == 0.0);
        CHECK(pieces.back().hi == s.T);
        for (std::size_t i = 0; i + 1 < pieces.size(); ++i) CHECK(pieces[i].hi == pieces[i + 1].lo);
        for (const auto& piece : pieces) CHECK(piece.hi > piece.lo);
    }
}

TEST_CASE("analytic candidates") {
    const auto iv = erlang_subintervals({9, 5, 2, 2}, 1, 1.5, 0.5);
    CHECK(*analytic_candidate({9, 5, 2, 2}, 1, 1.5, 0.5, iv[0]) == Approx(0.6689069783783671).epsilon(1e-14));
    const auto i = erlang_subintervals({10, 1, 2, 2}, 3, 5, 0.5);
    CHECK(*analytic_candidate({10, 1, 2, 2}, 3, 5, 0.5, i[1]) == Approx(2.3267132048600137).epsilon(1e-14));
    CHECK_FALSE(analytic_candidate({10, 1, 2, 2}, 3, 5, 0.5, i[0]).has_value());
}

TEST_CASE("linear_optimal_times") {
    auto opt = linear_optimal_times(kLinear, 0, 4, 0.5);
    CHECK(opt.tau_min == Approx(2.0).epsilon(1e-14));
    CHECK(opt.tau_max == 4.0);
    opt = linear_optimal_times(kLinear, 12, 4, 0.5);
    CHECK(opt.tau_min == 0.0);
    opt = linear_optimal_times(kLinear, 5, 4, 0.5);
    CHECK(opt.tau_min == Approx(1.6534264097200273).epsilon(1e-14));
    const auto grid = grid_minimize_impulse_time(kLinear, 5, 4, 0.5, 10000, Dynamics::Linear);
    CHECK(std::abs(grid.tau - opt.tau_min) <= 1e-3);
    opt = linear_optimal_times(kLinear, 5, 4, 1.0);
    CHECK(opt.tau_min == 0.0);
}

TEST_CASE("erlang_optimal_times") {
    auto opt = erlang_optimal_times({9, 5, 2, 2}, 1, 1.5, 0.5);
    CHECK(opt.tau_min == Approx(0.6689069783783671).epsilon(1e-12));
    CHECK(opt.tau_max == 1.5);

    opt = erlang_optimal_times({10, 1, 2, 2}, 3, 5, 0.5);
    CHECK(opt.tau_max == 5.0);
    bool has_formula = false;
    for (const auto& c : opt.candidates) {
        if (c.label == "I_{1,1}" && c.provenance == Provenance::Analytic) {
            has_formula = true;
            CHECK(c.tau == Approx(2.3267132048600137).epsilon(1e-14));
        }
    }
    CHECK(has_formula);
    CHECK(opt.J_min <= average_queue_length({10, 1, 2, 2}, 3, 5, 2.3267132048600137, 0.5, Dynamics::ErlangA));

    opt = erlang_optimal_times({10, 1, 2, 2}, 3, 5, 1.0);
    CHECK(opt.tau_min == 0.0);
}

TEST_CASE("optimizers agree with the grid oracle") {
    for (const auto& s : kSetups) {
        const auto opt = erlang_optimal_times(s.p, s.q0, s.T, 0.5);
        const auto grid = grid_minimize_impulse_time(s.p, s.q0, s.T, 0.5, 2000, Dynamics::ErlangA);
        INFO(s.name << " tau_min=" << opt.tau_min << " grid=" << grid.tau);
        CHECK(std::abs(opt.tau_min - grid.tau) <= 1e-3 * s.T);
        CHECK(opt.J_min <= grid.J + 1e-8);
    }
}

TEST_CASE("interior minimizers are stationary") {
    for (const auto& s : kSetups) {
        const auto opt = erlang_optimal_times(s.p, s.q0, s.T, 0.5);
        const auto pieces = erlang_subintervals(s.p, s.q0, s.T, 0.5);
        bool on_boundary = opt.tau_min <= 0 || opt.tau_min >= s.T;
        for (const auto& piece : pieces) on_boundary = on_boundary || std::abs(opt.tau_min - piece.lo) < 1e-9;
        if (on_boundary) continue;
        INFO(s.name << " tau_min=" << opt.tau_min);
        CHECK(std::abs(derivative_average(s.p, s.q0, s.T, opt.tau_min, 0.5, Dynamics::ErlangA)) <= 1e-8);
    }
}

TEST_CASE("impulsing at T is the worst choice") {
    for (const auto& s : kSetups) {
        const double at_end = average_queue_length(s.p, s.q0, s.T, s.T, 0.5, Dynamics::ErlangA);
        for (int k = 0; k < 2000; ++k) {
            const double tau = s.T * k / 1999.0;
            CHECK(average_queue_length(s.p, s.q0, s.T, tau, 0.5, Dynamics::ErlangA) <= at_end + 1e-12);
        }
    }
}

TEST_CASE("erlang optimizer collapses onto the linear one") {
    for (double q0 : {0.0, 3.0, 5.0, 12.0}) {
        const auto lin = linear_optimal_times(kLinear, q0, 4, 0.5);
        const auto same_rate = erlang_optimal_times({10, 1, 1, 2}, q0, 4, 0.5);
        const auto huge_c = erlang_optimal_times({10, 1, 2, 1000}, q0, 4, 0.5);
        CHECK(same_rate.tau_min == Approx(lin.tau_min).margin(1e-9));
        CHECK(same_rate.J_min == Approx(lin.J_min).margin(1e-9));
        CHECK(huge_c.tau_min == Approx(lin.tau_min).margin(1e-9));
        CHECK(huge_c.J_min == Approx(lin.J_min).margin(1e-9));
    }
}
