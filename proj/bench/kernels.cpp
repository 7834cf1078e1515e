// Serial reference against the OpenMP path for each batch kernel.
// Arg 0 = serial, 1 = parallel.

#include <random>

#include <benchmark/benchmark.h>

#include "ifind/kinematics/chain.hpp"
#include "ifind/parallel/batch.hpp"
#include "ifind/sim/config.hpp"

using namespace ifind;

namespace {

parallel::Exec exec_of(const benchmark::State& s) {
  return s.range(0) == 0 ? parallel::Exec::Serial : parallel::Exec::Parallel;
}

const surface::SurfaceMesh& phantom() {
  static const auto mesh = sim::load_mesh_source("phantom-abdomen", {});
  return mesh;
}

std::vector<Vec3> cloud(std::size_t n) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-0.15, 0.15), z(0.0, 0.2);
  std::vector<Vec3> out(n);
  for (auto& p : out) p = {u(rng), u(rng), z(rng)};
  return out;
}

std::vector<kin::JointVector> configs(const std::vector<kin::JointSpec>& joints, std::size_t n) {
  std::mt19937_64 rng(11);
  std::vector<kin::JointVector> out(n, kin::JointVector(static_cast<Eigen::Index>(joints.size())));
  for (auto& q : out)
    for (std::size_t j = 0; j < joints.size(); ++j)
      q[static_cast<Eigen::Index>(j)] = std::uniform_real_distribution<double>(joints[j].min, joints[j].max)(rng);
  return out;
}

void BM_ClosestPoints(benchmark::State& s) {
  const auto pts = cloud(2000);
  for (auto _ : s) benchmark::DoNotOptimize(parallel::closest_points(phantom(), pts, exec_of(s)));
  s.SetItemsProcessed(s.iterations() * static_cast<std::int64_t>(pts.size()));
}

void BM_Raycasts(benchmark::State& s) {
  auto pts = cloud(2000);
  for (auto& p : pts) p.z() = 0.3;
  for (auto _ : s) benchmark::DoNotOptimize(parallel::raycasts(phantom(), pts, -Vec3::UnitZ(), exec_of(s)));
  s.SetItemsProcessed(s.iterations() * static_cast<std::int64_t>(pts.size()));
}

void BM_IkRoundTrips(benchmark::State& s) {
  const auto chain = kin::load_chain("ifind-v2");
  const auto truths = configs(chain.joints, 100);
  const std::vector<kin::JointVector> seeds(truths.size(), kin::home(chain));
  for (auto _ : s) benchmark::DoNotOptimize(parallel::ik_round_trips(chain, truths, seeds, {}, exec_of(s)));
  s.SetItemsProcessed(s.iterations() * static_cast<std::int64_t>(truths.size()));
}

void BM_Separations(benchmark::State& s) {
  const auto rig = dual::load_rig("ifind-v3");
  const auto qs = configs(dual::rig_joints(rig), 2000);
  for (auto _ : s) benchmark::DoNotOptimize(parallel::separations(rig, qs, exec_of(s)));
  s.SetItemsProcessed(s.iterations() * static_cast<std::int64_t>(qs.size()));
}

void BM_SampledSeparations(benchmark::State& s) {
  const auto rig = dual::load_rig("ifind-v3");
  const auto qs = configs(dual::rig_joints(rig), 20);
  for (auto _ : s) benchmark::DoNotOptimize(parallel::sampled_separations(rig, qs, 100, exec_of(s)));
  s.SetItemsProcessed(s.iterations() * static_cast<std::int64_t>(qs.size()));
}

}  // namespace

BENCHMARK(BM_ClosestPoints)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Raycasts)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_IkRoundTrips)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Separations)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SampledSeparations)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
