#include "episim/attribution.hpp"

#include <numbers>

#include "episim/pipeline.hpp"
#include "test_util.hpp"

using namespace episim;

namespace {

struct SmallLibrary {
  std::vector<ScenarioRecord> records;
  LibraryIndex index;
};

const SmallLibrary& small_library() {
  static const SmallLibrary lib = [] {
    SmallLibrary l;
    SamplerOptions opts;
    opts.days = 730;
    std::vector<LibraryEntry> entries;
    for (std::uint64_t i = 0; i < 150; ++i) {
      const auto cfg = sample_scenario_config(21, i, {}, opts);
      l.records.push_back(make_record(cfg, run_scenario(cfg), Resolution::Weekly));
      entries.push_back(library_entry(l.records.back(), i));
    }
    l.index = LibraryIndex(std::move(entries));
    return l;
  }();
  return lib;
}

std::size_t feature(std::string_view name) {
  const auto& names = embedding_feature_names();
  return static_cast<std::size_t>(std::find(names.begin(), names.end(), name) - names.begin());
}

ObservedSeries weekly_cases(std::vector<double> v) {
  ObservedSeries s;
  s.resolution = Resolution::Weekly;
  s.channels.push_back({"cases", std::move(v)});
  return s;
}

}  // namespace

TEST(Embedding, DeterministicWithNamedDimensions) {
  const auto& rec = small_library().records[3];
  const auto a = embed(rec.observed(), rec.config.population);
  const auto b = embed(rec.observed(), rec.config.population);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.size(), embedding_feature_names().size());
  for (double x : a) EXPECT_TRUE(std::isfinite(x));
}

TEST(Embedding, InvariantToJointScalingOfCountsAndPopulation) {
  const auto& rec = small_library().records[5];
  auto s = rec.observed();
  s.channels.resize(1);  // cases only
  auto scaled = s;
  for (auto& v : scaled.channels[0].values) v *= 10.0;
  const auto a = embed(s, rec.config.population);
  const auto b = embed(scaled, rec.config.population * 10);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-9) << embedding_feature_names()[i];
}

TEST(Embedding, AnnualSinusoidConcentratesInAnnualBand) {
  std::vector<double> v(260);
  for (std::size_t t = 0; t < v.size(); ++t)
    v[t] = 500.0 * (1.0 + 0.3 * std::sin(2.0 * std::numbers::pi * static_cast<double>(t) / 52.0));
  const auto f = embed(weekly_cases(v), 100000);
  const double annual = f[feature("spec_annual")];
  EXPECT_GT(annual, 0.9);
  for (const auto& b : kSpectralBands)
    if (std::string_view(b.name) != "spec_annual") { EXPECT_GT(annual, 10.0 * f[feature(b.name)]) << b.name; }
}

TEST(Embedding, DailyInputIsAggregated) {
  std::vector<double> daily(700);
  for (std::size_t t = 0; t < daily.size(); ++t) daily[t] = static_cast<double>(t % 13);
  ObservedSeries d;
  d.resolution = Resolution::Daily;
  d.channels.push_back({"cases", daily});
  EXPECT_EQ(embed(d, 5000), embed(aggregate_weekly(d), 5000));
}

TEST(Embedding, RejectsShortOrUnnamedInput) {
  EXPECT_THROW(embed(weekly_cases(std::vector<double>(7, 1.0)), 1000), AttributionError);
  ObservedSeries s = weekly_cases(std::vector<double>(20, 1.0));
  s.channels[0].name = "other";
  EXPECT_THROW(embed(s, 1000), AttributionError);
  EXPECT_THROW(embed(weekly_cases(std::vector<double>(20, 1.0)), 0), AttributionError);
}

TEST(Retrieval, SelfIsNearestAtDistanceZero) {
  const auto& lib = small_library().index;
  for (std::size_t i = 0; i < lib.size(); i += 15) {
    const auto nn = lib.retrieve(lib.entry(i).raw, 3);
    ASSERT_FALSE(nn.empty());
    EXPECT_EQ(nn[0].distance, 0.0);
    // Exact duplicates would tie; the tie-break picks the lower id.
    EXPECT_LE(nn[0].id, lib.entry(i).id);
  }
}

TEST(Retrieval, MatchesBruteForceOrdering) {
  const auto& lib = small_library().index;
  const auto& query = small_library().records[7];
  const auto raw = embed(query.observed(), query.config.population);
  const auto z = lib.standardize(raw);
  std::vector<Neighbor> brute;
  for (std::size_t i = 0; i < lib.size(); ++i) {
    double d2 = 0.0;
    const auto row = lib.standardized(i);
    for (std::size_t j = 0; j < z.size(); ++j) d2 += (row[j] - z[j]) * (row[j] - z[j]);
    brute.push_back({lib.entry(i).id, std::sqrt(d2)});
  }
  std::sort(brute.begin(), brute.end(), [](const Neighbor& a, const Neighbor& b) {
    return a.distance != b.distance ? a.distance < b.distance : a.id < b.id;
  });
  const auto got = lib.retrieve(raw, 20);
  ASSERT_EQ(got.size(), 20u);
  for (std::size_t i = 0; i < got.size(); ++i) {
    EXPECT_EQ(got[i].id, brute[i].id);
    EXPECT_NEAR(got[i].distance, brute[i].distance, 1e-12);
  }
}

TEST(Retrieval, KIsClampedAndModeFilterApplies) {
  const auto& lib = small_library().index;
  const auto raw = lib.entry(0).raw;
  EXPECT_EQ(lib.retrieve(raw, lib.size()).size(), lib.size());
  EXPECT_EQ(lib.retrieve(raw, lib.size() + 100).size(), lib.size());
  for (const auto& n : lib.retrieve(raw, 30, Mode::Waterborne))
    EXPECT_EQ(lib.by_id(n.id).config.mode, Mode::Waterborne);
}

TEST(Retrieval, StandardizedColumnsHaveZeroMeanUnitSd) {
  const auto& lib = small_library().index;
  for (std::size_t j = 0; j < lib.dim(); ++j) {
    double m = 0.0, s = 0.0;
    for (std::size_t i = 0; i < lib.size(); ++i) m += lib.standardized(i)[j];
    m /= static_cast<double>(lib.size());
    for (std::size_t i = 0; i < lib.size(); ++i) s += std::pow(lib.standardized(i)[j] - m, 2);
    s = std::sqrt(s / static_cast<double>(lib.size()));
    EXPECT_NEAR(m, 0.0, 1e-9);
    if (s > 0.0) { EXPECT_NEAR(s, 1.0, 1e-9) << embedding_feature_names()[j]; }
  }
}

TEST(Aggregate, SingleNeighborCollapsesSummary) {
  const auto& lib = small_library().index;
  const auto nn = lib.retrieve(lib.entry(4).raw, 1);
  const auto res = aggregate_parameters(nn, lib, {"gamma", "log10_population"}, {});
  const auto& cfg = lib.by_id(nn[0].id).config;
  ASSERT_TRUE(res.parameters[0].retrieved);
  EXPECT_EQ(res.parameters[0].retrieved->median, cfg.epi.gamma);
  EXPECT_EQ(res.parameters[0].retrieved->q5, cfg.epi.gamma);
  EXPECT_EQ(res.parameters[0].retrieved->q95, cfg.epi.gamma);
  EXPECT_FALSE(res.parameters[0].prior);
}

TEST(Aggregate, WholeLibraryReproducesLibraryDistribution) {
  const auto& lib = small_library().index;
  const auto nn = lib.retrieve(lib.entry(0).raw, lib.size());
  const auto prior = prior_sample(3000, 99, {}, 730);
  const auto res = aggregate_parameters(nn, lib, {"gamma", "omega"}, prior);
  for (const auto& p : res.parameters) {
    std::vector<double> v;
    for (const auto& e : lib.entries()) v.push_back(*find_parameter(p.name).get(e.config));
    const auto direct = summarize_values(v);
    EXPECT_DOUBLE_EQ(p.retrieved->median, direct->median);
    // The library is itself a prior draw: medians agree up to sampling error.
    EXPECT_NEAR(p.retrieved->median, p.prior->median, 0.5 * (p.prior->q95 - p.prior->q5)) << p.name;
  }
}

TEST(Aggregate, NotApplicableParametersReportNa) {
  const auto& lib = small_library().index;
  std::vector<Neighbor> vector_only;
  for (const auto& e : lib.entries())
    if (e.config.mode == Mode::VectorBorne) vector_only.push_back({e.id, 0.0});
  ASSERT_FALSE(vector_only.empty());
  const auto res = aggregate_parameters(vector_only, lib, {"p_superspread", "biting_rate"}, {});
  EXPECT_FALSE(res.parameters[0].retrieved);
  EXPECT_TRUE(res.parameters[1].retrieved);
  const auto csv = attribution_csv(res);
  EXPECT_NE(csv.find("p_superspread,NA,NA,NA"), std::string::npos);
}

TEST(Parameters, RegistryIsUniqueAndLookupFails) {
  const auto names = all_parameter_names();
  EXPECT_EQ(names.size(), 33u);
  auto sorted = names;
  std::sort(sorted.begin(), sorted.end());
  EXPECT_EQ(std::adjacent_find(sorted.begin(), sorted.end()), sorted.end());
  EXPECT_THROW(find_parameter("nope"), AttributionError);
  for (const auto& n : default_validation_parameters()) EXPECT_NO_THROW(find_parameter(n));
}

TEST(Validation, MetricIsSymmetricForSingletons) {
  const auto prior = prior_sample(500, 4);
  const ParameterMetric metric(default_validation_parameters(), prior);
  for (std::size_t i = 0; i + 1 < 40; ++i) {
    const ScenarioConfig* a = &prior[i];
    const ScenarioConfig* b = &prior[i + 1];
    EXPECT_NEAR(metric.distance(std::span(&a, 1), *b), metric.distance(std::span(&b, 1), *a), 1e-12);
    EXPECT_EQ(metric.distance(std::span(&a, 1), *a), 0.0);
  }
}

TEST(Validation, SignTestPValues) {
  EXPECT_NEAR(sign_test_p_value(10, 0), std::pow(0.5, 10), 1e-15);
  EXPECT_NEAR(sign_test_p_value(5, 5), 638.0 / 1024.0, 1e-12);
  EXPECT_EQ(sign_test_p_value(0, 0), 1.0);
  EXPECT_EQ(sign_test_p_value(0, 7), 1.0);
}

TEST(Validation, DuplicateHeldOutsAlwaysWinOrTie) {
  const auto& lib = small_library().index;
  std::vector<HeldOut> held;
  for (std::size_t i = 0; i < 40; ++i) held.push_back({lib.entry(i).config, lib.entry(i).raw});
  ValidationOptions o;
  o.k = 1;
  o.prior_size = 500;
  o.seed = 1;
  const auto rep = validate_attribution(held, lib, o);
  EXPECT_EQ(rep.losses, 0u);
  EXPECT_GT(rep.wins, 0u);
  EXPECT_EQ(rep.win_fraction, 1.0);
  for (const auto& c : rep.cases) EXPECT_EQ(c.retrieved_distance, 0.0);
}

TEST(Validation, RandomRetrievalIsNearCoinFlip) {
  const auto& lib = small_library().index;
  std::vector<HeldOut> held;
  for (std::size_t i = 0; i < lib.size(); ++i) held.push_back({lib.entry(i).config, lib.entry(i).raw});
  ValidationOptions o;
  o.k = 20;
  o.prior_size = 500;
  o.seed = 2;
  o.retrieval = RetrievalKind::Random;
  const auto rep = validate_attribution(held, lib, o);
  const double n = static_cast<double>(rep.wins + rep.losses);
  EXPECT_NEAR(rep.win_fraction, 0.5, 3.0 * 0.5 / std::sqrt(n));
}

TEST(Validation, RetrievalBeatsRandomOnLibrary) {
  const auto& l = small_library();
  // Hold out the last 50 and search the first 100.
  std::vector<LibraryEntry> entries(l.index.entries().begin(), l.index.entries().begin() + 100);
  const LibraryIndex lib(std::move(entries));
  std::vector<HeldOut> held;
  for (std::size_t i = 100; i < 150; ++i) held.push_back({l.index.entry(i).config, l.index.entry(i).raw});
  ValidationOptions o;
  o.k = 10;
  o.prior_size = 1000;
  o.seed = 3;
  const auto rep = validate_attribution(held, lib, o);
  EXPECT_GT(rep.win_fraction, 0.5);
}

TEST(Library, DuplicateIdsRejected) {
  const auto& e = small_library().index.entry(0);
  EXPECT_THROW(LibraryIndex({e, e}), AttributionError);
  EXPECT_THROW(small_library().index.by_id(99999), AttributionError);
}
