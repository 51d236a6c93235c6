#include "locomip/plan.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "locomip/bnb.hpp"

namespace locomip {
namespace {

const std::string kScenarios = LOCOMIP_SCENARIO_DIR;

class FlatWalk : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    scene_ = new TerrainScene(load_terrain_file(kScenarios + "/flat/terrain.json"));
    robot_ = new RobotModel(load_robot_file(kScenarios + "/robots/quadruped.json"));
    Task task = load_task_file(kScenarios + "/flat/task.json");
    form_ = new Formulation(build_formulation(*scene_, *robot_, task));
    form_->fix_gait(gait_preset("walk", 4, 4, 4));
    solution_ = new MicpSolution(solve(form_->problem));
    plan_ = new LocomotionPlan(extract(*solution_, *form_, *robot_, *scene_));
  }
  static void TearDownTestSuite() {
    delete plan_;
    delete solution_;
    delete form_;
    delete robot_;
    delete scene_;
  }

  static TerrainScene* scene_;
  static RobotModel* robot_;
  static Formulation* form_;
  static MicpSolution* solution_;
  static LocomotionPlan* plan_;
};

TerrainScene* FlatWalk::scene_ = nullptr;
RobotModel* FlatWalk::robot_ = nullptr;
Formulation* FlatWalk::form_ = nullptr;
MicpSolution* FlatWalk::solution_ = nullptr;
LocomotionPlan* FlatWalk::plan_ = nullptr;

TEST_F(FlatWalk, SolvesAndValidates) {
  ASSERT_EQ(solution_->status, SolveStatus::kOptimal);
  EXPECT_LE(solution_->gap, 1e-4);
  const ValidationReport rep = validate(*plan_, *scene_, *robot_);
  EXPECT_TRUE(rep.passed) << rep.summary();
  EXPECT_GE(rep.min_tightness, -1e-9);
  ASSERT_NE(rep.find("dynamics.angular"), nullptr);
  EXPECT_LE(rep.find("dynamics.angular")->max_residual, 1e-6);
  EXPECT_EQ(plan_->gait_labels, std::vector<std::string>(4, "walk"));
}

TEST_F(FlatWalk, MarginsBoundedByExactMargin) {
  const ValidationReport rep = validate(*plan_, *scene_, *robot_);
  ASSERT_FALSE(rep.margins.empty());
  const double W = plan_->weight();
  for (const MarginSample& m : rep.margins) {
    EXPECT_LE(m.planned, m.exact + 1e-6 * W);
    EXPECT_LE(m.normalized, 1.0 + 1e-9);
  }
}

TEST_F(FlatWalk, DoubledForceFlagsDynamics) {
  LocomotionPlan bad = *plan_;
  bad.force[0][1] *= 2.0;
  const ValidationReport rep = validate(bad, *scene_, *robot_);
  EXPECT_FALSE(rep.passed);
  const FamilyResidual* dyn = rep.find("dynamics.linear");
  ASSERT_NE(dyn, nullptr);
  EXPECT_FALSE(dyn->pass);
  EXPECT_EQ(dyn->knot, 1);
}

TEST_F(FlatWalk, FootOffRegionFlagsRegion) {
  LocomotionPlan bad = *plan_;
  ContactEntry& e = bad.schedule[0];
  e.position.x() += 5.0;
  const ValidationReport rep = validate(bad, *scene_, *robot_);
  ASSERT_NE(rep.find("region"), nullptr);
  EXPECT_FALSE(rep.find("region")->pass);
  EXPECT_FALSE(rep.passed);
}

TEST_F(FlatWalk, JsonRoundTrip) {
  const LocomotionPlan back = plan_from_json(plan_to_json(*plan_));
  EXPECT_EQ(back.N(), plan_->N());
  EXPECT_EQ(back.leg_names, plan_->leg_names);
  ASSERT_EQ(back.schedule.size(), plan_->schedule.size());
  for (size_t i = 0; i < back.schedule.size(); ++i) {
    EXPECT_EQ(back.schedule[i].slot, plan_->schedule[i].slot);
    EXPECT_EQ(back.schedule[i].position, plan_->schedule[i].position);
  }
  for (int k = 0; k <= plan_->N(); ++k) EXPECT_EQ(back.com[k], plan_->com[k]);
  EXPECT_EQ(validate(back, *scene_, *robot_).summary(),
            validate(*plan_, *scene_, *robot_).summary());
  EXPECT_EQ(plan_to_json(back).dump(), plan_to_json(*plan_).dump());
}

TEST_F(FlatWalk, UnknownVersionRejected) {
  nlohmann::json doc = plan_to_json(*plan_);
  doc["version"] = 99;
  EXPECT_THROW(plan_from_json(doc), InputError);
  doc.erase("version");
  EXPECT_THROW(plan_from_json(doc), InputError);
}

TEST_F(FlatWalk, ExportWritesTables) {
  const auto dir = std::filesystem::temp_directory_path() / "locomip_plan_test";
  std::filesystem::remove_all(dir);
  export_plan(interpolate_swings(*plan_, 0.1, 4), *robot_, dir.string());
  for (const char* f : {"plan.json", "com.csv", "forces.csv", "alpha.csv", "torque.csv",
                        "feet.csv"}) {
    EXPECT_TRUE(std::filesystem::exists(dir / f)) << f;
  }
  std::ifstream in(dir / "alpha.csv");
  std::string header, line;
  std::getline(in, header);
  EXPECT_NE(header.find("LF_alpha_normalized"), std::string::npos);
  int rows = 0;
  while (std::getline(in, line)) rows += line.empty() ? 0 : 1;
  EXPECT_EQ(rows, plan_->N());
  EXPECT_EQ(load_plan_file((dir / "plan.json").string()).N(), plan_->N());
  std::filesystem::remove_all(dir);
}

TEST_F(FlatWalk, InterpolationLeavesValidationUnchanged) {
  const LocomotionPlan dense = interpolate_swings(*plan_, 0.1, 10);
  EXPECT_EQ(validate(dense, *scene_, *robot_).summary(),
            validate(*plan_, *scene_, *robot_).summary());
  const PlanDims& d = plan_->dims;
  for (int l = 0; l < d.n_l; ++l) {
    ASSERT_EQ(static_cast<int>(dense.foot_path[l].size()), d.N() * 10 + 1);
    for (int k = 0; k <= d.N(); ++k) {
      if (plan_->swinging(l, k)) continue;
      EXPECT_LE((dense.foot_path[l][k * 10] - plan_->foot[l][k]).norm(), 1e-12);
    }
  }
  EXPECT_THROW(interpolate_swings(*plan_, -0.1), InputError);
  EXPECT_THROW(interpolate_swings(*plan_, 0.1, 0), InputError);
}

TEST_F(FlatWalk, FractionalGaitRejected) {
  MicpSolution s = *solution_;
  s.x[form_->map.T[0][1].index] = 0.4;
  EXPECT_THROW(extract(s, *form_, *robot_, *scene_), ModelError);
  s.has_incumbent = false;
  EXPECT_THROW(extract(s, *form_, *robot_, *scene_), ModelError);
}

TEST(Swing, EndpointsAndApex) {
  const Eigen::Vector3d a(0.1, 0.2, 0.0), b(0.4, 0.1, 0.05);
  EXPECT_LE((swing_point(a, b, 0.1, 0.0) - a).norm(), 1e-12);
  EXPECT_LE((swing_point(a, b, 0.1, 1.0) - b).norm(), 1e-12);
  const Eigen::Vector3d mid = swing_point(a, b, 0.1, 0.5);
  EXPECT_NEAR(mid.x(), 0.25, 1e-12);
  EXPECT_NEAR(mid.z(), 0.025 + 0.1, 1e-12);
  double top = -1.0;
  for (int q = 0; q <= 100; ++q) top = std::max(top, swing_point(a, a, 0.1, q / 100.0).z());
  EXPECT_NEAR(top, 0.1, 1e-12);
}

TEST(Swing, ZeroLengthHopIsVertical) {
  const Eigen::Vector3d a(0.3, -0.2, 0.1);
  for (int q = 0; q <= 20; ++q) {
    const Eigen::Vector3d p = swing_point(a, a, 0.08, q / 20.0);
    EXPECT_DOUBLE_EQ(p.x(), a.x());
    EXPECT_DOUBLE_EQ(p.y(), a.y());
    EXPECT_GE(p.z(), a.z());
  }
}

TEST(Classify, Labels) {
  PlanDims d;
  d.N_t = 4;
  auto entry = [](int leg, int slot) {
    ContactEntry e;
    e.contact = leg;
    e.leg = leg;
    e.slot = slot;
    return e;
  };
  const auto labels = classify_gait({entry(0, 0), entry(3, 0), entry(1, 1), entry(2, 2)}, d);
  EXPECT_EQ(labels, (std::vector<std::string>{"trot", "walk", "walk", "stance"}));
  EXPECT_EQ(classify_gait({entry(0, 0), entry(1, 0)}, d)[0], "other");
  EXPECT_EQ(classify_gait({entry(1, 2), entry(2, 2)}, d)[2], "trot");
}

}  // namespace
}  // namespace locomip
