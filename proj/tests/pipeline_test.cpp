#include <gtest/gtest.h>

#include <algorithm>
#include <set>
#include <sstream>

#include "milchar/pipeline.hpp"
#include "support.hpp"

using namespace milchar;
using namespace milchar::pipeline;
using testing_support::ScratchDir;

namespace {

std::vector<std::string> lines_of(const fs::path& p) {
  const auto content = text::read_file(p);
  std::vector<std::string> out;
  for (auto l : text::split(content, '\n')) {
    if (!l.empty()) out.emplace_back(l);
  }
  return out;
}

// Six small artificial datasets, one per kind, written with their sidecars.
std::vector<fs::path> tiny_world(const ScratchDir& dir) {
  RunConfig cfg;
  cfg.out = dir / "data";
  for (auto k : kAllGenKinds) {
    auto s = default_spec(k, 3);
    s.n_pos = 4;
    s.n_neg = 4;
    s.bag_size_min = 3;
    s.bag_size_max = 4;
    const auto p = dir / (std::string(kind_name(k)) + ".spec");
    text::write_file_atomic(p, format_gen_spec(s));
    cfg.spec_files.push_back(p);
  }
  std::vector<fs::path> csvs;
  for (const auto& p : cmd_gen(cfg)) {
    if (p.extension() == ".csv") csvs.push_back(p);
  }
  return csvs;
}

// Evaluates the tiny world with the full catalog once per process.
struct World {
  ScratchDir dir{"pipeline-world"};
  std::vector<fs::path> csvs = tiny_world(dir);
  fs::path eval_file;
  fs::path dist_dir = dir / "dist";

  World() {
    RunConfig cfg;
    cfg.inputs = csvs;
    cfg.folds = 2;
    cfg.seed = 11;
    cfg.out = dir / "eval";
    eval_file = cmd_eval(cfg).front();
    RunConfig d;
    d.eval_file = eval_file;
    d.inputs = csvs;
    d.out = dist_dir;
    cmd_dist(d);
  }
};

const World& world() {
  static const World w;
  return w;
}

}  // namespace

TEST(Gen, WritesAllSixWithSidecarsDeterministically) {
  ScratchDir dir("pipeline-gen");
  RunConfig cfg;
  cfg.seed = 7;
  cfg.out = dir / "a";
  const auto first = cmd_gen(cfg);
  ASSERT_EQ(first.size(), 12u);
  EXPECT_EQ(std::count_if(first.begin(), first.end(), [](const auto& p) { return p.extension() == ".spec"; }), 6);
  cfg.out = dir / "b";
  const auto second = cmd_gen(cfg);
  ASSERT_EQ(second.size(), 12u);
  for (std::size_t i = 0; i < 12; ++i) {
    EXPECT_EQ(first[i].filename(), second[i].filename());
    EXPECT_EQ(text::read_file(first[i]), text::read_file(second[i]));
  }
  // A sidecar regenerates its dataset byte for byte.
  RunConfig regen;
  regen.spec_files = {dir / "a" / "Maron-MI.spec"};
  regen.out = dir / "c";
  cmd_gen(regen);
  EXPECT_EQ(text::read_file(dir / "c" / "Maron-MI.csv"), text::read_file(dir / "a" / "Maron-MI.csv"));
}

TEST(Gen, KindSelectionAndErrors) {
  ScratchDir dir("pipeline-gen-kind");
  RunConfig cfg;
  cfg.out = dir.path();
  cfg.kinds = {"concept", "widened"};
  const auto files = cmd_gen(cfg);
  ASSERT_EQ(files.size(), 4u);
  EXPECT_EQ(files[0].filename(), "MI-concept.csv");
  EXPECT_EQ(files[2].filename(), "Widened-MI.csv");
  cfg.kinds = {"gaussian", "nonsense"};
  EXPECT_THROW(cmd_gen(cfg), UsageError);
  cfg.kinds = {"rotated", "rotated"};
  EXPECT_THROW(cmd_gen(cfg), UsageError);
  cfg.kinds.clear();
  cfg.spec_files = {dir / "missing.spec"};
  EXPECT_THROW(cmd_gen(cfg), DataError);
}

TEST(Eval, FullCatalogCellCount) {
  const auto m = load_eval_matrix(world().eval_file);
  EXPECT_EQ(m.datasets.size(), 6u);
  EXPECT_EQ(m.classifiers.size(), 22u);
  EXPECT_EQ(m.cells.size(), 132u);
  EXPECT_EQ(m.folds, 2u);
  EXPECT_EQ(m.seed, 11u);
}

TEST(Eval, ClassifierFilterMatchesFullRun) {
  ScratchDir dir("pipeline-filter");
  RunConfig cfg;
  cfg.inputs = world().csvs;
  cfg.folds = 2;
  cfg.seed = 11;
  cfg.classifiers = {"simpleMIL", "emdd"};
  cfg.out = dir.path();
  std::ostringstream progress;
  cfg.progress = &progress;
  const auto m = load_eval_matrix(cmd_eval(cfg).front());
  EXPECT_EQ(m.cells.size(), 12u);
  const auto full = load_eval_matrix(world().eval_file);
  for (std::size_t d = 0; d < 6; ++d) {
    for (std::size_t c = 0; c < 2; ++c) {
      const auto& mine = m.cell(d, c);
      const auto& theirs = full.cell(d, full.classifier_index(m.classifiers[c].display_name));
      EXPECT_EQ(mine.auc, theirs.auc);
      EXPECT_EQ(mine.roc.points(), theirs.roc.points());
    }
  }
  EXPECT_EQ(lines_of(dir / std::string(kEvalFile)).size(), text::split(format_eval_matrix(m), '\n').size() - 1);
  std::size_t progress_lines = 0;
  for (char ch : progress.str()) progress_lines += ch == '\n';
  EXPECT_EQ(progress_lines, 12u);
}

TEST(Eval, Errors) {
  ScratchDir dir("pipeline-eval-errors");
  RunConfig cfg;
  cfg.out = dir.path();
  EXPECT_THROW(cmd_eval(cfg), UsageError);
  cfg.inputs = {dir / "absent.csv"};
  try {
    cmd_eval(cfg);
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("absent.csv"), std::string::npos);
  }
  cfg.inputs = world().csvs;
  cfg.classifiers = {"noSuchClassifier"};
  EXPECT_THROW(cmd_eval(cfg), UsageError);
  EXPECT_FALSE(fs::exists(dir / std::string(kEvalFile)));
}

TEST(Dist, ThreeSquareMatricesWithSharedNames) {
  const auto& w = world();
  std::vector<DistanceMatrix> ds;
  for (const char* f : {"d_meta.csv", "d_auc.csv", "d_roc.csv"}) ds.push_back(load_distance_csv(w.dist_dir / f));
  const auto m = load_eval_matrix(w.eval_file);
  for (const auto& d : ds) {
    EXPECT_EQ(d.names, m.datasets);
    for (std::size_t i = 0; i < d.size(); ++i) EXPECT_EQ(d(i, i), 0.0);
  }
  for (std::size_t i = 0; i < 6; ++i) {
    for (std::size_t j = 0; j < 6; ++j) EXPECT_LE(ds[1](i, j), ds[2](i, j) + 1e-12);
  }
  RunConfig cfg;
  cfg.eval_file = w.eval_file;
  cfg.inputs = {w.csvs.front()};
  cfg.out = w.dir / "dist-missing";
  EXPECT_THROW(cmd_dist(cfg), DataError);
  cfg.inputs.clear();
  EXPECT_THROW(cmd_dist(cfg), UsageError);
}

TEST(Embed, SixRowsAndStress) {
  const auto& w = world();
  RunConfig cfg;
  cfg.inputs = {w.dist_dir / "d_roc.csv"};
  cfg.out = w.dir / "embed";
  const auto path = cmd_embed(cfg).front();
  const auto e = load_embedding_csv(path);
  EXPECT_EQ(e.coords.rows(), 6);
  EXPECT_EQ(e.coords.cols(), 2);
  EXPECT_GE(e.stress, 0.0);
  EXPECT_TRUE(lines_of(path).back().starts_with("# stress="));
  cfg.inputs.push_back(cfg.inputs.front());
  EXPECT_THROW(cmd_embed(cfg), UsageError);
}

TEST(Oos, TwinLandsOnItsOwnCoordinates) {
  // Three base datasets embed exactly in the plane, so the twin's placement
  // is only limited by the optimizer.
  const auto& w = world();
  ScratchDir dir("pipeline-oos");
  const std::vector<fs::path> base_files(w.csvs.begin(), w.csvs.begin() + 3);
  RunConfig e;
  e.inputs = base_files;
  e.folds = 2;
  e.seed = 4;
  e.classifiers = {"simpleMIL", "diverseDensity", "emdd", "bagStats-mean"};
  e.out = dir / "eval";
  const auto eval_file = cmd_eval(e).front();
  RunConfig d;
  d.eval_file = eval_file;
  d.inputs = base_files;
  d.out = dir / "dist";
  cmd_dist(d);
  RunConfig m;
  m.inputs = {dir / "dist" / "d_roc.csv"};
  m.out = dir / "embed";
  const auto emb_file = cmd_embed(m).front();
  const auto emb = load_embedding_csv(emb_file);

  RunConfig o;
  o.eval_file = eval_file;
  o.embedding_file = emb_file;
  o.inputs = {base_files[1]};
  o.out = dir / "oos";
  const auto placed = lines_of(cmd_oos(o).front());
  const auto twin = base_files[1].stem().string();
  std::vector<std::string> fields;
  for (const auto& l : placed) {
    if (l.starts_with(twin + ",") && l.ends_with(",1")) {
      for (auto f : text::split(l, ',')) fields.emplace_back(f);
    }
  }
  ASSERT_EQ(fields.size(), 4u);
  const auto row = static_cast<Eigen::Index>(std::find(emb.names.begin(), emb.names.end(), twin) - emb.names.begin());
  EXPECT_NEAR(text::parse_double(fields[1]).value(), emb.coords(row, 0), 1e-3);
  EXPECT_NEAR(text::parse_double(fields[2]).value(), emb.coords(row, 1), 1e-3);

  o.folds = 3;
  try {
    cmd_oos(o);
    FAIL() << "expected DataError";
  } catch (const DataError& err) {
    EXPECT_NE(std::string(err.what()).find("catalog/protocol mismatch"), std::string::npos);
  }
  o.folds.reset();
  o.metric = "cosine";
  EXPECT_THROW(cmd_oos(o), UsageError);
}

TEST(Diversity, FullCatalogTables) {
  const auto& w = world();
  RunConfig cfg;
  cfg.eval_file = w.eval_file;
  cfg.out = w.dir / "diversity";
  const auto files = cmd_diversity(cfg);
  const auto corr = lines_of(files[0]);
  EXPECT_EQ(corr.size(), 23u);
  const auto cum = lines_of(files[1]);
  ASSERT_EQ(cum.size(), 23u);
  EXPECT_EQ(cum.front(), "component,cumulative_fraction");
  EXPECT_EQ(cum.back(), "22,1");
}

TEST(PlotData, RowsColumnsAndMeanBounds) {
  const auto& w = world();
  RunConfig e;
  e.inputs = {w.dist_dir / "d_auc.csv"};
  e.out = w.dir / "plot-embed";
  const auto emb_file = cmd_embed(e).front();
  RunConfig cfg;
  cfg.eval_file = w.eval_file;
  cfg.embedding_file = emb_file;
  cfg.out = w.dir / "plot";
  const auto rows = lines_of(cmd_plotdata(cfg).front());
  ASSERT_EQ(rows.size(), 7u);
  EXPECT_EQ(rows.front(), "name,x,y,mean_auc,selected_auc");
  const auto m = load_eval_matrix(w.eval_file);
  const auto k = m.classifier_index("emdd");
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto f = text::split(rows[r], ',');
    ASSERT_EQ(f.size(), 5u);
    const auto d = m.dataset_index(std::string(f[0]));
    double lo = 1.0;
    double hi = 0.0;
    for (std::size_t c = 0; c < 22; ++c) {
      lo = std::min(lo, m.cell(d, c).auc);
      hi = std::max(hi, m.cell(d, c).auc);
    }
    const double mean = text::parse_double(f[3]).value();
    EXPECT_GE(mean, lo);
    EXPECT_LE(mean, hi);
    EXPECT_EQ(text::parse_double(f[4]).value(), m.cell(d, k).auc);
  }
  cfg.selected = "noSuchClassifier";
  EXPECT_ANY_THROW(cmd_plotdata(cfg));
  cfg.selected = "emdd";
  cfg.embedding_file = w.dir / "nope.csv";
  EXPECT_THROW(cmd_plotdata(cfg), DataError);
  cfg.embedding_file.clear();
  EXPECT_THROW(cmd_plotdata(cfg), UsageError);
}
