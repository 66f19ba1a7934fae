#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "uavrsma/joint.hpp"

using namespace uavrsma;

namespace {

Scenario two_user_scenario() {
  Scenario sc;
  sc.users = {{60, 90, 0}, {220, 170, 0}};
  sc.weights = Eigen::VectorXd::Ones(2);
  sc.p_t = 100.0;  // 20 dB SNR at sigma2 = 1
  sc.sigma2 = 1.0;
  sc.rate_thresholds_bps = Eigen::VectorXd::Zero(2);
  sc.box.x_min = 0.0;
  sc.box.x_max = 300.0;
  sc.box.y_min = 0.0;
  sc.box.y_max = 300.0;
  sc.box.z_min = 80.0;
  sc.box.z_max = 120.0;
  sc.n_t = 2;
  return sc;
}

}  // namespace

TEST_CASE("scenario validation") {
  Scenario sc = two_user_scenario();
  CHECK_NOTHROW(sc.validate());

  SUBCASE("weight dimension mismatch") {
    sc.weights = Eigen::VectorXd::Ones(3);
    CHECK_THROWS(sc.validate());
  }
  SUBCASE("nonpositive power") {
    sc.p_t = 0.0;
    CHECK_THROWS(sc.validate());
  }
  SUBCASE("empty box") {
    sc.box.z_min = 130.0;
    CHECK_THROWS(sc.validate());
  }
  SUBCASE("no users") {
    sc.users.clear();
    sc.weights.resize(0);
    sc.rate_thresholds_bps.resize(0);
    CHECK_THROWS(sc.validate());
  }
}

TEST_CASE("baseline position is the centroid at mid altitude") {
  Scenario sc = two_user_scenario();
  const Position3D q = sc.baseline_position();
  CHECK(q.x == doctest::Approx(140.0));
  CHECK(q.y == doctest::Approx(130.0));
  CHECK(q.z == doctest::Approx(100.0));
}

TEST_CASE("los channels at a position") {
  Scenario sc = two_user_scenario();
  ChannelRealization real = draw_channel_realization(sc, sc.baseline_position(), 1);
  const Position3D q{60, 90, 100};
  std::vector<ChannelVector> channels = channels_at(sc, real, q);
  REQUIRE(channels.size() == 2);
  // Directly above user 0 at 100 m: coefficient 1/d on every antenna.
  CHECK(channels[0].coefficients(0).real() == doctest::Approx(0.01).epsilon(1e-12));
  CHECK(channels[0].coefficients(1).real() == doctest::Approx(0.01).epsilon(1e-12));
  const double d1 = distance(q, sc.users[1]);
  CHECK(std::abs(channels[1].coefficients(0)) == doctest::Approx(1.0 / d1).epsilon(1e-12));
  CHECK(channels[1].user_index == 1);
}

TEST_CASE("alternating optimization invariants and scheme dominance") {
  Scenario sc = two_user_scenario();
  JointOptParams params;
  JointSolution rsma = alternating_optimize(sc, Scheme::kRsma, params, 1);
  JointSolution sdma = alternating_optimize(sc, Scheme::kSdma, params, 1);
  JointSolution noma = alternating_optimize(sc, Scheme::kNoma, params, 1);

  SUBCASE("outer trace is monotone nondecreasing") {
    for (const JointSolution* sol : {&rsma, &sdma, &noma}) {
      REQUIRE(!sol->trace.entries.empty());
      for (size_t i = 1; i < sol->trace.entries.size(); ++i) {
        CHECK(sol->trace.entries[i].wsr_bps_hz >=
              sol->trace.entries[i - 1].wsr_bps_hz - 1e-6);
      }
    }
  }
  SUBCASE("rate splitting dominates both baselines") {
    CHECK(rsma.report.wsr >= sdma.report.wsr - 1e-6);
    CHECK(rsma.report.wsr >= noma.report.wsr - 1e-6);
  }
  SUBCASE("solutions stay inside the box") {
    for (const JointSolution* sol : {&rsma, &sdma, &noma}) {
      CHECK(sc.box.contains(sol->uav_position, 1e-6));
      CHECK(sol->precoder.total_power() <= sc.p_t + kFeasTol * sc.p_t);
    }
  }
  SUBCASE("joint beats the fixed average location") {
    CHECK(rsma.report.wsr >=
          avg_location_baseline(sc, Scheme::kRsma, params, 1).report.wsr - 1e-6);
    CHECK(sdma.report.wsr >=
          avg_location_baseline(sc, Scheme::kSdma, params, 1).report.wsr - 1e-6);
    CHECK(noma.report.wsr >=
          avg_location_baseline(sc, Scheme::kNoma, params, 1).report.wsr - 1e-6);
  }
  SUBCASE("reported wsr matches an independent re-evaluation") {
    ChannelRealization real = draw_channel_realization(sc, sc.baseline_position(), 1);
    for (const JointSolution* sol : {&rsma, &sdma, &noma}) {
      const RateReport rep =
          evaluate_solution(sc, real, sol->scheme, sol->uav_position, sol->precoder,
                            sol->rate_split);
      CHECK(std::abs(rep.wsr - sol->report.wsr) <= 1e-6);
    }
  }
  SUBCASE("inner convergence curve ends at the reported wsr") {
    for (const JointSolution* sol : {&rsma, &sdma, &noma}) {
      REQUIRE(!sol->inner_wsr.empty());
      CHECK(sol->inner_wsr.back() == doctest::Approx(sol->report.wsr).epsilon(1e-6));
    }
  }
}

TEST_CASE("single user degeneracy") {
  Scenario sc = two_user_scenario();
  sc.users = {{100, 200, 0}};
  sc.weights = Eigen::VectorXd::Ones(1);
  sc.rate_thresholds_bps = Eigen::VectorXd::Zero(1);
  JointOptParams params;
  params.epsilon = 1e-6;
  JointSolution rsma = alternating_optimize(sc, Scheme::kRsma, params, 1);
  JointSolution sdma = alternating_optimize(sc, Scheme::kSdma, params, 1);
  JointSolution noma = alternating_optimize(sc, Scheme::kNoma, params, 1);
  // No multi-user interference: the three schemes coincide.
  CHECK(std::abs(rsma.report.wsr - sdma.report.wsr) <= 1e-6);
  CHECK(std::abs(rsma.report.wsr - noma.report.wsr) <= 1e-6);
  // The UAV descends right above the user; the fixed baseline stays higher.
  CHECK(std::abs(rsma.uav_position.x - 100.0) <= 0.1);
  CHECK(std::abs(rsma.uav_position.y - 200.0) <= 0.1);
  CHECK(std::abs(rsma.uav_position.z - 80.0) <= 0.1);
  JointSolution avg = avg_location_baseline(sc, Scheme::kRsma, params, 1);
  CHECK(rsma.report.wsr > avg.report.wsr);
}

TEST_CASE("weight scaling leaves the solution invariant") {
  Scenario sc = two_user_scenario();
  JointOptParams params;
  JointSolution base = alternating_optimize(sc, Scheme::kRsma, params, 2);

  Scenario scaled = sc;
  const double c = 3.0;
  scaled.weights *= c;
  JointOptParams scaled_params = params;
  // The convergence threshold is in objective units and must scale with it.
  scaled_params.epsilon *= c;
  scaled_params.precoder.epsilon *= c;
  JointSolution res = alternating_optimize(scaled, Scheme::kRsma, scaled_params, 2);
  CHECK(res.report.wsr / base.report.wsr == doctest::Approx(c).epsilon(1e-4));
  CHECK(std::abs(res.uav_position.x - base.uav_position.x) <= 1e-3);
  CHECK(std::abs(res.uav_position.y - base.uav_position.y) <= 1e-3);
  CHECK(std::abs(res.uav_position.z - base.uav_position.z) <= 1e-3);
}

TEST_CASE("rician runs are seed deterministic") {
  Scenario sc = two_user_scenario();
  sc.channel_model = ChannelModelKind::kRician;
  sc.n_t = 2;
  JointOptParams params;
  JointSolution a = alternating_optimize(sc, Scheme::kRsma, params, 7);
  JointSolution b = alternating_optimize(sc, Scheme::kRsma, params, 7);
  CHECK(a.report.wsr == b.report.wsr);
  CHECK(a.uav_position.x == b.uav_position.x);
  CHECK(a.uav_position.y == b.uav_position.y);
  CHECK(a.uav_position.z == b.uav_position.z);

  JointSolution c = alternating_optimize(sc, Scheme::kRsma, params, 8);
  CHECK(c.report.wsr != a.report.wsr);
}
