#include <benchmark/benchmark.h>

#include <string>

#include "shillsim/attack.hpp"
#include "shillsim/dataset.hpp"
#include "shillsim/detect.hpp"
#include "shillsim/gan.hpp"
#include "shillsim/itemgraph.hpp"
#include "shillsim/recommender.hpp"
#include "shillsim/rng.hpp"
#include "shillsim/synthetic.hpp"

namespace {

using namespace shillsim;

RatingsDataset make_dataset(int users, int items, double density) {
  Rng rng(90210);
  RatingsDataset d;
  for (int u = 0; u < users; ++u) {
    int uu = d.intern_user("u" + std::to_string(u));
    for (int i = 0; i < items; ++i) {
      if (rng.uniform() < density) {
        d.add_rating(uu, d.intern_item("i" + std::to_string(i)),
                     1 + static_cast<int>(rng.below(5)));
      }
    }
  }
  return d;
}

RatingsDataset desk_data() {
  SyntheticConfig sc;
  return make_synthetic(sc);
}

AttackThresholds resolved_thresholds(const RatingsDataset& d) {
  AttackThresholds t;
  t.max_ratings = derive_max_ratings(d);
  return t;
}

void BM_SplitDataset(benchmark::State& state) {
  auto d = make_dataset(static_cast<int>(state.range(0)), 200, 0.1);
  for (auto _ : state) {
    auto sp = split(d, 0.7, 17);
    benchmark::DoNotOptimize(sp.train.rating_count());
  }
}
BENCHMARK(BM_SplitDataset)->Arg(200)->Arg(800);

void BM_BuildGraph(benchmark::State& state) {
  auto d = make_dataset(static_cast<int>(state.range(0)), 200, 0.1);
  for (auto _ : state) {
    auto g = build_graph(d);
    benchmark::DoNotOptimize(g.edge_count());
  }
}
BENCHMARK(BM_BuildGraph)->Arg(200)->Arg(800);

void BM_SampleProfileItems(benchmark::State& state) {
  auto d = desk_data();
  auto g = build_graph(d);
  auto t = resolved_thresholds(d);
  Rng rng(7);
  for (auto _ : state) {
    auto s = sample_profile_items(g, d, t, t.max_ratings, rng);
    benchmark::DoNotOptimize(s.size());
  }
}
BENCHMARK(BM_SampleProfileItems);

void BM_GeneratorForward(benchmark::State& state) {
  int k = static_cast<int>(state.range(0));
  Rng rng(3);
  auto gen = GeneratorParams::standard(true, k, rng);
  GanBatch batch;
  batch.noise.resize(k);
  batch.real.resize(k);
  for (int i = 0; i < k; ++i) {
    batch.noise(i) = rng.normal();
    batch.real(i) = rng.uniform(1.0, 5.0);
  }
  batch.condition = 1.0;
  for (auto _ : state) {
    auto trace = generator_forward(gen, batch);
    benchmark::DoNotOptimize(trace.ratings.sum());
  }
}
BENCHMARK(BM_GeneratorForward)->Arg(8)->Arg(28);

void BM_CriticGradientStep(benchmark::State& state) {
  Rng rng(4);
  auto gen = GeneratorParams::standard(false, 16, rng);
  auto disc = DiscriminatorParams::standard(rng);
  GanBatch batch;
  batch.noise.resize(16);
  batch.real.resize(16);
  for (int i = 0; i < 16; ++i) {
    batch.noise(i) = rng.normal();
    batch.real(i) = rng.uniform(1.0, 5.0);
  }
  GanLossConfig cfg;
  auto grads = MlpGrads::zeros_like(disc.critic);
  for (auto _ : state) {
    double loss =
        loss_discriminator_grad(gen, disc, batch, 0.37, cfg, &grads);
    benchmark::DoNotOptimize(loss);
  }
}
BENCHMARK(BM_CriticGradientStep);

void BM_GeneratorGradientStep(benchmark::State& state) {
  Rng rng(5);
  auto gen = GeneratorParams::standard(false, 16, rng);
  auto disc = DiscriminatorParams::standard(rng);
  GanBatch batch;
  batch.noise.resize(16);
  batch.real.resize(16);
  for (int i = 0; i < 16; ++i) {
    batch.noise(i) = rng.normal();
    batch.real(i) = rng.uniform(1.0, 5.0);
  }
  GanLossConfig cfg;
  auto ge = MlpGrads::zeros_like(gen.embed);
  auto gl = MlpGrads::zeros_like(gen.link);
  auto go = MlpGrads::zeros_like(gen.out);
  for (auto _ : state) {
    double loss = loss_generator_grad(gen, disc, batch, cfg, &ge, &gl, &go);
    benchmark::DoNotOptimize(loss);
  }
}
BENCHMARK(BM_GeneratorGradientStep);

void BM_BuildProfile(benchmark::State& state) {
  auto kind = static_cast<AttackKind>(state.range(0));
  auto d = desk_data();
  auto g = build_graph(d);
  auto t = resolved_thresholds(d);
  Rng rng(6);
  auto gen = GeneratorParams::standard(false, t.max_ratings, rng);
  const GeneratorParams* gp = kind == AttackKind::kGoat ? &gen : nullptr;
  for (auto _ : state) {
    auto profiles = build_profile_batch(d, g, kind, 1, t, gp, 11);
    benchmark::DoNotOptimize(profiles.front().entries.size());
  }
  state.SetLabel(attack_kind_name(kind));
}
BENCHMARK(BM_BuildProfile)
    ->Arg(static_cast<int>(AttackKind::kGoat))
    ->Arg(static_cast<int>(AttackKind::kAve))
    ->Arg(static_cast<int>(AttackKind::kRan))
    ->Arg(static_cast<int>(AttackKind::kBand));

void BM_TrainBprEpoch(benchmark::State& state) {
  auto d = desk_data();
  RecTrainConfig cfg;
  cfg.epochs = 1;
  cfg.seed = 12;
  for (auto _ : state) {
    auto model = train_bpr(d, cfg);
    benchmark::DoNotOptimize(model.score(0, 0));
  }
}
BENCHMARK(BM_TrainBprEpoch);

void BM_DetectPca(benchmark::State& state) {
  auto d = desk_data();
  for (auto _ : state) {
    auto report = detect_pca(d, 9);
    benchmark::DoNotOptimize(report.flagged.size());
  }
}
BENCHMARK(BM_DetectPca);

}  // namespace

BENCHMARK_MAIN();
