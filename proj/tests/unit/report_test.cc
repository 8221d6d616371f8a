#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <limits>

#include "cek/causal/propensity.h"
#include "cek/error.h"
#include "cek/eval/bundle.h"
#include "cek/report/config.h"
#include "cek/report/csv.h"
#include "cek/report/figures.h"
#include "cek/report/pipeline.h"
#include "cek/synth/synth.h"
#include "cek/text.h"

namespace cek::report {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::vector<std::string> Lines(const std::string& text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start < text.size()) {
    const std::size_t end = text.find('\n', start);
    out.push_back(text.substr(start, end - start));
    start = end == std::string::npos ? text.size() : end + 1;
  }
  return out;
}

synth::SynthConfig Cohort(std::size_t n, std::uint64_t seed) {
  synth::SynthConfig c;
  c.n = n;
  c.d = 5;
  c.propensity_coef = {0.7, -0.5, 0.3, 0.0, 0.0};
  c.outcome_coef = {0.4, 0.0, 0.3, 0.2, 0.0};
  c.tau = -0.3;
  c.seed = seed;
  return c;
}

std::vector<eval::MetricsRecord> FiveFoldRecords(const std::string& o) {
  std::vector<eval::MetricsRecord> out;
  const std::vector<double> p = {0.2, 0.7, 0.4, 0.9, 0.55, 0.1};
  const std::vector<double> y = {0, 1, 1, 1, 0, 0};
  const std::vector<int> a = {0, 1, 0, 1, 1, 0};
  const std::vector<std::string> names = {"0", "1"};
  for (Phase phase : {Phase::kTrain, Phase::kValidation}) {
    for (int f = 0; f < 5; ++f) {
      auto t = eval::MetricsTable(p, y, a, true, "treatment", o, phase, f, names);
      out.insert(out.end(), t.begin(), t.end());
    }
  }
  return out;
}

TEST(MetricsCsv, PropensityLayout) {
  const std::string text = FormatMetricsCsv(FiveFoldRecords(""), MetricsKind::kPropensity);
  const auto lines = Lines(text);
  ASSERT_EQ(lines.size(), 31u);  // header + 2 phases x 5 folds x 3 strata
  const auto header = SplitCsvLine(lines[0]);
  EXPECT_EQ(header, MetricsCsvColumns(MetricsKind::kPropensity));
  EXPECT_EQ(std::count(header.begin(), header.end(), "O"), 0);
  EXPECT_EQ(header[0], "TX");
  EXPECT_EQ(header.back(), "notes");
  for (std::size_t i = 1; i < lines.size(); ++i) {
    EXPECT_EQ(SplitCsvLine(lines[i]).size(), header.size());
  }
}

TEST(MetricsCsv, OutcomeLayoutHasOColumn) {
  const auto header = MetricsCsvColumns(MetricsKind::kOutcome);
  ASSERT_GE(header.size(), 2u);
  EXPECT_EQ(header[0], "TX");
  EXPECT_EQ(header[1], "O");
  EXPECT_EQ(header.size(), MetricsCsvColumns(MetricsKind::kPropensity).size() + 1);
}

TEST(MetricsCsv, ParseRoundTrips) {
  for (MetricsKind kind : {MetricsKind::kPropensity, MetricsKind::kOutcome}) {
    const auto records = FiveFoldRecords(kind == MetricsKind::kOutcome ? "outcome" : "");
    const std::string text = FormatMetricsCsv(records, kind);
    const auto back = ParseMetricsCsv(text, kind);
    EXPECT_EQ(back, records);
    EXPECT_EQ(FormatMetricsCsv(back, kind), text);
  }
}

TEST(MetricsCsv, MalformedHeaderThrows) {
  EXPECT_THROW(ParseMetricsCsv("TX,phase\n", MetricsKind::kPropensity), IoError);
}

eval::BalanceTable Table(Phase phase, double scale) {
  eval::BalanceTable t;
  t.phase = phase;
  t.num_folds = 5;
  for (int c = 0; c < 10; ++c) {
    eval::CovariateBalance b;
    b.name = "x" + std::to_string(c + 1);
    for (int f = 0; f < 5; ++f) {
      b.unweighted.push_back(scale * (10 - c) / 10.0 + 0.001 * f);
      b.weighted.push_back(scale * 0.01 * (c + 1));
    }
    b.mean_unweighted = b.unweighted[2];
    b.mean_weighted = b.weighted[0];
    t.covariates.push_back(b);
  }
  return t;
}

TEST(SmdCsv, Layout) {
  const std::string text =
      FormatSmdCsv(Table(Phase::kTrain, 1.0), Table(Phase::kValidation, 2.0), "treatment", "y");
  const auto lines = Lines(text);
  ASSERT_EQ(lines.size(), 11u);
  EXPECT_EQ(SplitCsvLine(lines[0]), SmdCsvColumns(5));
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto cells = SplitCsvLine(lines[i]);
    ASSERT_EQ(cells.size(), 24u);
    EXPECT_EQ(cells[2], "train+validation");
    EXPECT_EQ(cells[3], "x" + std::to_string(i));
  }
  const auto first = SplitCsvLine(lines[1]);
  EXPECT_EQ(*ParseDouble(first[4]), 1.0);        // train_unweighted fold 0
  EXPECT_EQ(*ParseDouble(first[14]), 2.0);       // validation_unweighted fold 0
  EXPECT_EQ(*ParseDouble(first[19]), 2 * 0.01);  // validation_weighted fold 0
}

TEST(SmdCsv, UnitWeightsRepeatUnweightedBlock) {
  eval::BalanceTable t = Table(Phase::kTrain, 1.0);
  for (auto& c : t.covariates) c.weighted = c.unweighted;
  const auto lines = Lines(FormatSmdCsv(t, t, "treatment", "y"));
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto cells = SplitCsvLine(lines[i]);
    for (int f = 0; f < 5; ++f) EXPECT_EQ(cells[4 + f], cells[9 + f]);
  }
}

TEST(SmdCsv, InfiniteValues) {
  eval::BalanceTable t = Table(Phase::kTrain, 1.0);
  t.covariates[0].unweighted[0] = std::numeric_limits<double>::infinity();
  const auto lines = Lines(FormatSmdCsv(t, t, "treatment", "y"));
  EXPECT_EQ(SplitCsvLine(lines[1])[4], "inf");
}

class BundleFixture : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    frame_ = new CohortFrame(synth::Generate(Cohort(1500, 3)).first);
    const FoldPlan plan = MakeFolds(frame_->size(), 5, 4, frame_->treatment, true);
    eval::TrainedArtifacts art;
    learners::LearnerSpec spec;
    spec.calibration = learners::CalibrationMethod::kSigmoid;
    art.propensity = causal::FitPropensity(*frame_, spec, plan, 5);
    artifacts_ = new eval::TrainedArtifacts(std::move(art));
  }
  static void TearDownTestSuite() {
    delete frame_;
    delete artifacts_;
  }
  static CohortFrame* frame_;
  static eval::TrainedArtifacts* artifacts_;
};

CohortFrame* BundleFixture::frame_ = nullptr;
eval::TrainedArtifacts* BundleFixture::artifacts_ = nullptr;

const json* FindFigure(const std::vector<Figure>& figures, const std::string& name) {
  for (const Figure& f : figures) {
    if (f.name == name) return &f.data;
  }
  return nullptr;
}

TEST_F(BundleFixture, BalanceFigureSortedDescending) {
  const auto figures = BuildFigures(eval::EvaluateAll(*artifacts_, *frame_, {}));
  const json* f = FindFigure(figures, "balance_validation");
  ASSERT_NE(f, nullptr);
  const json& covs = f->at("covariates");
  ASSERT_EQ(covs.size(), 5u);
  for (std::size_t i = 1; i < covs.size(); ++i) {
    EXPECT_GE(covs[i - 1]["smd_unweighted"].get<double>(), covs[i]["smd_unweighted"].get<double>());
  }
  EXPECT_EQ(covs[0]["name"], "x1");
}

TEST_F(BundleFixture, ReflectedDistributionHasNegativeTreatedDensities) {
  const auto figures = BuildFigures(eval::EvaluateAll(*artifacts_, *frame_, {}));
  const json* f = FindFigure(figures, "propensity_distribution_train");
  ASSERT_NE(f, nullptr);
  EXPECT_EQ(f->at("mode"), "pdf_reflected");
  bool negative = false;
  for (const auto& p : f->at("series")[1]["points"]) {
    EXPECT_LE(p[1].get<double>(), 0.0);
    negative |= p[1].get<double>() < 0.0;
  }
  EXPECT_TRUE(negative);
}

TEST_F(BundleFixture, FiguresAreDeterministic) {
  const auto a = BuildFigures(eval::EvaluateAll(*artifacts_, *frame_, {}));
  const auto b = BuildFigures(eval::EvaluateAll(*artifacts_, *frame_, {}));
  ASSERT_EQ(a.size(), b.size());
  EXPECT_GE(a.size(), 12u);  // six per phase
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].data.dump(), b[i].data.dump());
    EXPECT_EQ(RenderSvg(a[i].data), RenderSvg(b[i].data));
  }
}

TEST_F(BundleFixture, SubsetMaskUnknownColumn) {
  EXPECT_THROW(SubsetMask(*frame_, {{"age", ">", 65.0}}), SchemaError);
  const Mask m = SubsetMask(*frame_, {{"x1", ">", 0.0}, {"x2", "<=", 0.5}});
  for (std::size_t i = 0; i < frame_->size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    EXPECT_EQ(m[i], frame_->covariates(r, 0) > 0.0 && frame_->covariates(r, 1) <= 0.5);
  }
}

TEST(JsonNumber, NonFinite) {
  EXPECT_EQ(JsonNumber(std::numeric_limits<double>::infinity()), "inf");
  EXPECT_EQ(JsonNumber(-std::numeric_limits<double>::infinity()), "-inf");
  EXPECT_EQ(JsonNumber(std::nan("")), "nan");
  EXPECT_EQ(JsonNumber(0.5), 0.5);
}

json MinimalConfig(const std::string& path) {
  return {{"input",
           {{"path", path}, {"treatment_col", "treatment"}, {"outcome_col", "outcome"},
            {"id_col", "sample_id"}, {"covariate_cols", "rest"}}},
          {"method", "ipw"}};
}

TEST(Config, Errors) {
  EXPECT_THROW(ParsePipelineConfig(json::array()), ConfigError);
  json j = MinimalConfig("c.csv");
  j["method"] = "bogus";
  EXPECT_THROW(ParsePipelineConfig(j), ConfigError);
  j = MinimalConfig("c.csv");
  j["method"] = "doubly_robust";
  EXPECT_THROW(ParsePipelineConfig(j), ConfigError);
  j = MinimalConfig("c.csv");
  j["folds"] = {{"k", 1}};
  EXPECT_THROW(ParsePipelineConfig(j), ConfigError);
  j = MinimalConfig("c.csv");
  j["evaluation"] = {{"calibration_strategy", "window"}};
  EXPECT_THROW(ParsePipelineConfig(j), ConfigError);
  j = MinimalConfig("c.csv");
  j["subsets"] = {{"old", {{{"column", "x1"}, {"op", "~"}, {"value", 1}}}}};
  EXPECT_THROW(ParsePipelineConfig(j), ConfigError);
  j = MinimalConfig("c.csv");
  j["propensity_learner"] = {{"type", "svm"}};
  EXPECT_THROW(ParsePipelineConfig(j), ConfigError);
}

TEST(Config, RelativePathAndDefaults) {
  const PipelineConfig c = ParsePipelineConfig(MinimalConfig("c.csv"), "/data");
  EXPECT_EQ(fs::path(c.input_path), fs::path("/data/c.csv"));
  EXPECT_EQ(c.folds.k, 5);
  EXPECT_TRUE(c.folds.stratified);
  EXPECT_EQ(c.propensity_learner.calibration, learners::CalibrationMethod::kIsotonic);
}

TEST(Config, CanonicalJsonIgnoresKeyOrder) {
  const json a = json::parse(R"({"b": 1, "a": {"y": 2, "x": 3}})");
  const json b = json::parse(R"({"a": {"x": 3, "y": 2}, "b": 1})");
  EXPECT_EQ(CanonicalJson(a), CanonicalJson(b));
  EXPECT_EQ(Fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(Fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
}

TEST(Pipeline, EndToEndDeterministic) {
  const fs::path root = fs::path(::testing::TempDir()) / "cek_report_pipeline";
  fs::remove_all(root);
  fs::create_directories(root);
  const auto [frame, oracle] = synth::Generate(Cohort(1000, 6));
  WriteCohortCsv(frame, (root / "cohort.csv").string());
  json j = MinimalConfig((root / "cohort.csv").string());
  j["method"] = "doubly_robust";
  j["propensity_learner"] = {{"type", "logistic"}, {"calibration", "sigmoid"}};
  j["outcome_learner"] = {{"type", "logistic"}};
  j["subsets"] = {{"x1_high", {{{"column", "x1"}, {"op", ">"}, {"value", 0.0}}}}};
  const PipelineConfig config = ParsePipelineConfig(j);
  const RunResult a = RunPipeline(config, {.output_dir = (root / "a").string()});
  const RunResult b = RunPipeline(config, {.output_dir = (root / "b").string()});
  ASSERT_EQ(a.files, b.files);
  const auto count = [&](const std::string& ext) {
    return std::count_if(a.files.begin(), a.files.end(), [&](const std::string& f) {
      return fs::path(f).extension() == ext;
    });
  };
  EXPECT_GE(count(".svg"), 6);
  EXPECT_GE(count(".csv"), 2);
  for (const std::string& name : {"metrics_propensity.csv", "metrics_outcome.csv", "smd.csv",
                                  "manifest.json"}) {
    EXPECT_NE(std::find(a.files.begin(), a.files.end(), name), a.files.end()) << name;
  }
  for (const std::string& rel : a.files) {
    EXPECT_EQ(ReadTextFile((root / "a" / rel).string()), ReadTextFile((root / "b" / rel).string()))
        << rel;
  }
  ASSERT_TRUE(a.ate.has_value());
  EXPECT_NEAR(a.ate->ate, oracle.ate, 0.08);
  ASSERT_EQ(a.subsets.size(), 1u);
  EXPECT_EQ(a.subsets[0].bundle.selected,
            static_cast<std::size_t>(std::count_if(
                frame.sample_ids.begin(), frame.sample_ids.end(),
                [&, i = std::size_t{0}](const std::string&) mutable {
                  return frame.covariates(static_cast<Eigen::Index>(i++), 0) > 0.0;
                })));
  fs::remove_all(root);
}

TEST(Pipeline, MissingColumnIsSchemaError) {
  const fs::path root = fs::path(::testing::TempDir()) / "cek_report_schema";
  fs::create_directories(root);
  WriteCohortCsv(synth::Generate(Cohort(100, 7)).first, (root / "cohort.csv").string());
  json j = MinimalConfig((root / "cohort.csv").string());
  j["input"]["covariate_cols"] = {"x1", "age"};
  EXPECT_THROW(Execute(ParsePipelineConfig(j)), SchemaError);
  fs::remove_all(root);
}

}  // namespace
}  // namespace cek::report
