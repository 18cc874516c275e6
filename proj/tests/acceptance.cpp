// Acceptance suite: runs every criterion, prints one PASS/FAIL line each and
// exits nonzero if any criterion fails. `--known-failure N` (repeatable)
// marks a criterion whose failure is expected: it still prints FAIL, but only
// an unexpected result changes the exit code.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "milchar/pipeline.hpp"
#include "support.hpp"

using namespace milchar;
namespace fs = std::filesystem;
namespace ts = testing_support;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Shared seed-1 run: gen -> eval -> dist -> embed with the default protocol.
struct Run {
  ts::ScratchDir dir{"acceptance"};
  std::vector<MilDataset> datasets;
  EvalMatrix matrix;
  DistanceMatrix d_roc_matrix;
};

constexpr std::uint64_t kSeed = 1;

void pipeline_run(const fs::path& root, std::size_t jobs) {
  pipeline::RunConfig cfg;
  cfg.seed = kSeed;
  cfg.jobs = jobs;
  cfg.out = root / "data";
  std::vector<fs::path> csvs;
  for (const auto& p : pipeline::cmd_gen(cfg)) {
    if (p.extension() == ".csv") csvs.push_back(p);
  }
  cfg.inputs = csvs;
  cfg.out = root / "eval";
  const auto eval = pipeline::cmd_eval(cfg).front();
  cfg.eval_file = eval;
  cfg.out = root / "dist";
  pipeline::cmd_dist(cfg);
  cfg.inputs = {root / "dist" / "d_roc.csv"};
  cfg.out = root / "embed";
  pipeline::cmd_embed(cfg);
}

void fill(Run& r) {
  pipeline_run(r.dir / "jobs1", 1);
  r.matrix = load_eval_matrix(r.dir / "jobs1" / "eval" / std::string(pipeline::kEvalFile));
  for (const auto& name : r.matrix.datasets) r.datasets.push_back(load_dataset(r.dir / "jobs1" / "data" / (name + ".csv")));
  r.d_roc_matrix = load_distance_csv(r.dir / "jobs1" / "dist" / "d_roc.csv");
}

Run& shared_run() {
  static Run run;
  [[maybe_unused]] static const bool ready = (fill(run), true);
  return run;
}

// ---------------------------------------------------------------------------

Outcome auc_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  CounterRng rng(derive_key(kSeed, "acceptance", 1));
  double worst = 0.0;
  for (int t = 0; t < 500; ++t) {
    const auto s = ts::random_scored_labels(rng, 30);
    const double got = auc(roc_curve(s.scores, s.labels));
    worst = std::max(worst, std::abs(got - ts::concordant_pairs_auc(s.scores, s.labels)));
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-9 && secs < 5.0, "max |error| " + fmt(worst) + " over 500 sets, " + fmt(secs, 3) + " s"};
}

Outcome roc_area_metric() {
  const RocCurve perfect({{0, 0}, {0, 1}, {1, 1}});
  const RocCurve chance;
  const RocCurve mirror({{0, 0}, {1, 0}, {1, 1}});
  CounterRng rng(derive_key(kSeed, "acceptance", 2));
  double worst = 0.0;
  for (int t = 0; t < 200; ++t) {
    const auto a = ts::random_curve(rng);
    const auto b = ts::random_curve(rng);
    const auto c = ts::random_curve(rng);
    worst = std::max(worst, std::abs(roc_area_between(a, b) - roc_area_between(b, a)));
    worst = std::max(worst, roc_area_between(a, a));
    worst = std::max(worst, roc_area_between(a, c) - roc_area_between(a, b) - roc_area_between(b, c));
  }
  const bool analytic = roc_area_between(perfect, perfect) == 0.0 && roc_area_between(perfect, chance) == 0.5 &&
                        roc_area_between(perfect, mirror) == 1.0;
  return {worst <= 1e-12 && analytic,
          "worst axiom violation " + fmt(worst) + ", analytic values " + (analytic ? "exact" : "wrong")};
}

Outcome domination() {
  const auto& m = shared_run().matrix;
  const auto da = d_auc(m);
  const auto dr = d_roc(m);
  int violations = 0;
  int checks = 0;
  for (std::size_t i = 0; i < m.datasets.size(); ++i) {
    for (std::size_t j = i + 1; j < m.datasets.size(); ++j) {
      for (std::size_t k = 0; k < m.classifiers.size(); ++k, ++checks) {
        const double gap = std::abs(m.cell(i, k).auc - m.cell(j, k).auc);
        violations += gap > roc_area_between(m.cell(i, k).roc, m.cell(j, k).roc) + 1e-12;
      }
      ++checks;
      violations += da(i, j) > dr(i, j) + 1e-12;
    }
  }
  return {violations == 0, std::to_string(violations) + " violations in " + std::to_string(checks) + " checks"};
}

DistanceMatrix planted(const Eigen::MatrixXd& p) {
  DistanceMatrix d;
  for (Eigen::Index i = 0; i < p.rows(); ++i) d.names.push_back("p" + std::to_string(i));
  d.values = ts::pairwise_distances(p);
  return d;
}

Outcome mds_exactness() {
  const auto t0 = std::chrono::steady_clock::now();
  CounterRng rng(derive_key(kSeed, "acceptance", 4));
  double worst_rel = 0.0;
  double worst_stress = 0.0;
  for (int t = 0; t < 50; ++t) {
    const auto n = static_cast<Eigen::Index>(rng.uniform_int(5, 20));
    const auto d = planted(ts::random_points(rng, n, 2));
    const auto e = classical_mds(d);
    worst_stress = std::max(worst_stress, e.stress);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = i + 1; j < n; ++j) {
        const double got = (e.coords.row(i) - e.coords.row(j)).norm();
        worst_rel = std::max(worst_rel, std::abs(got - d.values(i, j)) / d.values(i, j));
      }
    }
  }
  const double secs = seconds_since(t0);
  return {worst_rel <= 1e-6 && worst_stress < 1e-6 && secs < 10.0,
          "max relative error " + fmt(worst_rel) + ", max stress " + fmt(worst_stress) + ", " + fmt(secs, 3) + " s"};
}

// Grid-search minimum of the placement residual: a 200x200 grid over the
// reachable window, then three 200x200 zooms around the best cell.
double grid_oracle(const Eigen::MatrixXd& base, std::span<const double> dists) {
  const double reach = *std::max_element(dists.begin(), dists.end());
  Eigen::Vector2d lo = base.colwise().minCoeff().transpose().array() - reach;
  Eigen::Vector2d hi = base.colwise().maxCoeff().transpose().array() + reach;
  double best = std::numeric_limits<double>::infinity();
  Eigen::Vector2d arg = lo;
  constexpr int kSteps = 200;
  for (int level = 0; level < 4; ++level) {
    const Eigen::Vector2d h = (hi - lo) / kSteps;
    for (int a = 0; a <= kSteps; ++a) {
      for (int b = 0; b <= kSteps; ++b) {
        const Eigen::Vector2d z(lo(0) + h(0) * a, lo(1) + h(1) * b);
        const double r = placement_residual(base, dists, z);
        if (r < best) {
          best = r;
          arg = z;
        }
      }
    }
    lo = arg - 2.0 * h;
    hi = arg + 2.0 * h;
  }
  return best;
}

Outcome oos_recovery() {
  CounterRng rng(derive_key(kSeed, "acceptance", 5));
  double worst_dist = 0.0;
  double worst_oracle = 0.0;
  int placements = 0;
  for (int t = 0; t < 20; ++t) {
    const auto n = static_cast<Eigen::Index>(rng.uniform_int(5, 12));
    const auto p = ts::random_points(rng, n, 2);
    for (Eigen::Index k = 0; k < n; ++k, ++placements) {
      Eigen::MatrixXd rest(n - 1, 2);
      std::vector<double> dists;
      for (Eigen::Index i = 0, r = 0; i < n; ++i) {
        if (i == k) continue;
        rest.row(r++) = p.row(i);
        dists.push_back((p.row(i) - p.row(k)).norm());
      }
      const auto e = classical_mds(planted(rest));
      const auto placed = out_of_sample(e, dists);
      for (Eigen::Index i = 0; i < n - 1; ++i) {
        const double realized = (e.coords.row(i).transpose() - placed.coords).norm();
        worst_dist = std::max(worst_dist, std::abs(realized - dists[static_cast<std::size_t>(i)]));
      }
      worst_oracle = std::max(worst_oracle, std::abs(placed.residual - grid_oracle(e.coords, dists)));
      // Inconsistent distances leave a nonzero residual to compare.
      std::vector<double> noisy = dists;
      for (auto& d : noisy) d *= std::exp(0.1 * rng.normal());
      const auto rough = out_of_sample(e, noisy);
      worst_oracle = std::max(worst_oracle, std::abs(rough.residual - grid_oracle(e.coords, noisy)));
    }
  }
  return {worst_dist <= 1e-4 && worst_oracle <= 1e-3,
          std::to_string(placements) + " held-out points: max distance error " + fmt(worst_dist) +
              ", max |residual - grid oracle| " + fmt(worst_oracle)};
}

Outcome concept_recovery() {
  const auto& run = shared_run();
  const auto t0 = std::chrono::steady_clock::now();
  std::ostringstream detail;
  bool ok = true;
  for (const char* dataset : {"Gaussian-MI", "Maron-MI", "MI-concept"}) {
    const auto& ds = run.datasets[run.matrix.dataset_index(dataset)];
    for (const char* clf : {"diverseDensity", "emdd"}) {
      const auto cv = cross_validate(ds, find_classifier(clf), 10, kSeed);
      ok = ok && cv.auc >= 0.85;
      detail << dataset << '/' << clf << ' ' << fmt(cv.auc, 3) << ", ";
    }
  }
  const auto& gaussian = run.datasets[run.matrix.dataset_index("Gaussian-MI")];
  const auto target = train(find_classifier("emdd"), gaussian, kSeed).concept_location();
  const double miss = target ? (*target - Eigen::Vector2d(7.0, 1.0)).norm() : INFINITY;
  const double secs = seconds_since(t0);
  ok = ok && miss <= 1.0 && secs < 300.0;
  detail << "EMDD target off (7,1) by " << fmt(miss, 3) << ", " << fmt(secs, 3) << " s";
  return {ok, detail.str()};
}

Outcome separation() {
  const auto& run = shared_run();
  const auto& d = run.d_roc_matrix;
  const std::vector<std::string> concept_group{"Gaussian-MI", "Maron-MI", "MI-concept"};
  const std::vector<std::string> distribution_group{"Difficult-MI", "Rotated-MI", "Widened-MI"};
  auto index = [&](const std::string& n) {
    return static_cast<std::size_t>(std::find(d.names.begin(), d.names.end(), n) - d.names.begin());
  };
  double between = 0.0;
  for (const auto& a : concept_group) {
    for (const auto& b : distribution_group) between += d(index(a), index(b)) / 9.0;
  }
  double within = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = i + 1; j < 3; ++j) within += d(index(concept_group[i]), index(concept_group[j])) / 3.0;
  }
  const double ratio = between / within;
  return {ratio >= 1.5, "between-group mean " + fmt(between) + ", within-group mean " + fmt(within) + ", ratio " +
                            fmt(ratio, 3) + " (needs >= 1.5)"};
}

Outcome metadata_collapse() {
  const auto& run = shared_run();
  // Fixed bag size and equal bag counts make the metadata coincide.
  auto rotated = default_spec(GenKind::rotated, kSeed);
  auto widened = default_spec(GenKind::widened, kSeed);
  for (auto* s : {&rotated, &widened}) s->bag_size_min = s->bag_size_max = 20;
  const auto a = MilDataset("Rotated-fixed", generate(rotated).bags());
  const auto b = MilDataset("Widened-fixed", generate(widened).bags());

  std::vector<MetaVector> metas;
  std::vector<std::string> names;
  for (const auto& ds : run.datasets) {
    metas.push_back(meta_vector(ds));
    names.push_back(ds.name());
  }
  metas.push_back(meta_vector(a));
  metas.push_back(meta_vector(b));
  names.push_back(a.name());
  names.push_back(b.name());
  const auto dm = d_meta(normalize_meta(metas), names);
  const double meta_gap = dm(names.size() - 2, names.size() - 1);

  EvalOptions opt;
  opt.seed = kSeed;
  const std::vector<MilDataset> pair{a, b};
  const auto m = evaluate_all(pair, catalog(), opt);
  const double roc_gap = d_roc(m)(0, 1);
  return {meta_gap == 0.0 && roc_gap > 0.0, "d_meta " + fmt(meta_gap) + ", d_roc " + fmt(roc_gap)};
}

Outcome determinism() {
  const auto& run = shared_run();
  pipeline_run(run.dir / "jobs8", 8);
  int files = 0;
  int differing = 0;
  for (const auto& entry : fs::recursive_directory_iterator(run.dir / "jobs1")) {
    if (!entry.is_regular_file()) continue;
    ++files;
    const auto twin = run.dir / "jobs8" / fs::relative(entry.path(), run.dir / "jobs1");
    if (!fs::exists(twin) || text::read_file(entry.path()) != text::read_file(twin)) ++differing;
  }
  return {files == 17 && differing == 0,
          std::to_string(files) + " files compared, " + std::to_string(differing) + " differ (--jobs 1 vs --jobs 8)"};
}

Outcome catalog_integrity() {
  const auto& run = shared_run();
  const auto& c = catalog();
  std::map<ClassifierFamily, int> count;
  for (const auto& s : c) ++count[s.family];
  const std::map<ClassifierFamily, int> expected = {
      {ClassifierFamily::simple_mil, 1},     {ClassifierFamily::diverse_density, 1},
      {ClassifierFamily::emdd, 1},           {ClassifierFamily::milboost, 1},
      {ClassifierFamily::citation_knn, 2},   {ClassifierFamily::misvm, 2},
      {ClassifierFamily::miles, 2},          {ClassifierFamily::mil_kernel, 3},
      {ClassifierFamily::bag_statistics, 3}, {ClassifierFamily::bag_of_words, 3},
      {ClassifierFamily::bag_dissimilarity, 3}};
  int trained = 0;
  std::string failure;
  for (const auto& ds : run.datasets) {
    for (const auto& spec : c) {
      try {
        const auto model = train(spec, ds, kSeed);
        model.score(ds.bags().front());
        ++trained;
      } catch (const Error& e) {
        if (failure.empty()) failure = ", first failure: " + spec.display_name + " on " + ds.name() + ": " + e.what();
      }
    }
  }
  const bool ok = c.size() == 22 && count == expected && trained == 132 && run.matrix.cells.size() == 132;
  return {ok, std::to_string(c.size()) + " classifiers, multiplicities " + (count == expected ? "match" : "differ") +
                  ", " + std::to_string(trained) + "/132 trainings on full datasets" + failure};
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> known;
  for (int i = 1; i < argc; ++i) {
    if (std::string(argv[i]) == "--known-failure" && i + 1 < argc) {
      known.insert(std::stoi(argv[++i]));
    } else {
      std::cerr << "usage: acceptance [--known-failure N]...\n";
      return 2;
    }
  }

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"AUC oracle equivalence", auc_oracle},
      {"ROC-area metric suite", roc_area_metric},
      {"Domination d_auc <= d_roc", domination},
      {"MDS exactness", mds_exactness},
      {"Out-of-sample recovery", oos_recovery},
      {"Concept recovery", concept_recovery},
      {"Concept/distribution separation", separation},
      {"Metadata collapse", metadata_collapse},
      {"Determinism", determinism},
      {"Catalog integrity", catalog_integrity},
  };

  int unexpected = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const bool expected_fail = known.contains(id);
    std::cout << (o.pass ? "PASS" : "FAIL") << "  " << id << ". " << criteria[i].first << ": " << o.detail
              << (expected_fail ? "  [known failure]" : "") << std::endl;
    if (o.pass == expected_fail) ++unexpected;
  }
  return unexpected == 0 ? 0 : 1;
}
