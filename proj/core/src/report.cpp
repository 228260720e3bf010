#include "morphtok/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include "json_config.hpp"

namespace morphtok::eval {

using detail::json;

namespace {

json num(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

SourceCounts count_sources(const std::vector<SimilarityRecord>& recs, bool lemma) {
  SourceCounts c;
  for (const auto& r : recs) {
    switch (lemma ? r.lemma_source : r.wordform_source) {
      case sgns::VectorSource::kVocab: ++c.vocab; break;
      case sgns::VectorSource::kCompositional: ++c.compositional; break;
      case sgns::VectorSource::kUncovered: ++c.uncovered; break;
    }
  }
  return c;
}

std::string pattern_of(const Distribution& d) {
  if (d.empty) return "empty";
  const auto top = std::max_element(d.fractions.begin(), d.fractions.end()) - d.fractions.begin();
  if (top == 2) return "concentrated";
  if (top == 1) return "intermediate";
  return "dispersed";
}

ModelSection evaluate_model(const std::vector<UniMorphEntry>& entries, const EvalModel& m,
                            const EvalOptions& opts) {
  if (!m.model) throw std::invalid_argument("evaluate: model '" + m.name + "' is null");
  ModelSection s;
  s.name = m.name;
  s.kind = m.model->kind;
  s.vocab_size = m.model->vocab.size();
  s.window = m.model->adjusted_window;
  s.avg_tokens_per_word = m.model->avg_tokens_per_word;
  s.similarity = morph_similarity_eval(entries, *m.model, m.subwords);
  s.lemma_sources = count_sources(s.similarity.records, true);
  s.wordform_sources = count_sources(s.similarity.records, false);
  s.distribution = similarity_distribution(s.similarity.records);
  s.pattern = pattern_of(s.distribution);
  if (s.vocab_size > opts.k) {
    s.curve = neighbor_rank_curve(*m.model, opts.queries, opts.k, derive_seed(opts.seed, "eval.queries." + m.name));
    if (s.curve.queries > 0 && s.curve.mean_similarity.front() != 0.0) {
      for (std::size_t r : opts.dropoff_ranks) {
        if (r >= 1 && r <= s.curve.mean_similarity.size()) s.dropoffs[r] = dropoff(s.curve.mean_similarity, r);
      }
    }
  }
  try {
    s.separation = allomorph_separation(entries, *m.model, m.subwords,
                                        derive_seed(opts.seed, "eval.inter." + m.name), opts.max_inter_pairs);
  } catch (const std::exception& e) {
    s.separation_error = e.what();
  }
  return s;
}

void assign_cohesion(std::vector<ModelSection>& models) {
  std::vector<std::pair<double, std::size_t>> ranked;
  for (std::size_t i = 0; i < models.size(); ++i) {
    if (models[i].separation) ranked.emplace_back(models[i].separation->ratio, i);
    else models[i].cohesion = "unavailable";
  }
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  });
  for (std::size_t r = 0; r < ranked.size(); ++r) {
    auto& c = models[ranked[r].second].cohesion;
    if (r == 0) c = "highest";
    else if (r + 1 == ranked.size()) c = "lowest";
    else c = "moderate";
  }
}

MetricSpread spread(std::vector<double> values) {
  MetricSpread s;
  s.values = std::move(values);
  s.mean = mean_of(s.values);
  s.sd = population_sd(s.values);
  return s;
}

json summary_json(const SimilaritySummary& s) {
  return json{{"total", s.total},   {"covered", s.covered}, {"coverage", num(s.coverage)},
              {"mean", num(s.mean)}, {"sd", num(s.sd)},      {"empty", s.empty}};
}

json distribution_json(const Distribution& d) {
  json bins = json::array();
  for (std::size_t b = 0; b < 3; ++b) {
    bins.push_back(json{{"lo", kBinEdges[b]}, {"hi", kBinEdges[b + 1]}, {"count", d.counts[b]},
                        {"fraction", num(d.fractions[b])}});
  }
  return json{{"empty", d.empty}, {"bins", bins}};
}

json sources_json(const SourceCounts& c) {
  return json{{"vocab", c.vocab}, {"compositional", c.compositional}, {"uncovered", c.uncovered}};
}

void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << text;
}

std::string fmt(double x) {
  std::ostringstream o;
  o << std::setprecision(17) << x;
  return o.str();
}

}  // namespace

EvaluationReport evaluate(const std::vector<UniMorphEntry>& entries,
                          const std::vector<std::vector<EvalModel>>& runs,
                          const std::optional<AgreementInput>& agreement,
                          const std::optional<BoundaryInput>& boundary, const EvalOptions& opts) {
  if (runs.empty() || runs.front().empty()) throw std::invalid_argument("evaluate: no models");
  EvaluationReport rep;
  rep.entries = entries.size();
  rep.runs = runs.size();
  rep.options = opts;

  std::vector<std::vector<ModelSection>> all;
  for (const auto& run : runs) {
    if (run.size() != runs.front().size()) throw std::invalid_argument("evaluate: runs differ in model count");
    std::vector<ModelSection> sections;
    for (std::size_t i = 0; i < run.size(); ++i) {
      if (run[i].name != runs.front()[i].name) throw std::invalid_argument("evaluate: runs differ in model names");
      sections.push_back(evaluate_model(entries, run[i], opts));
    }
    assign_cohesion(sections);
    all.push_back(std::move(sections));
  }
  rep.models = all.front();

  if (rep.models.size() >= 2) {
    std::vector<NamedVocab> vocabs;
    std::vector<std::pair<std::string, std::vector<SimilarityRecord>>> recs;
    for (std::size_t i = 0; i < rep.models.size(); ++i) {
      vocabs.push_back({rep.models[i].name, runs.front()[i].model->vocab.tokens()});
      recs.emplace_back(rep.models[i].name, rep.models[i].similarity.records);
    }
    rep.overlap = vocab_overlap(vocabs);
    rep.restricted = restricted_comparison(recs);
  }
  if (agreement) {
    rep.agreement = agreement_summary(agreement->words, agreement->morph_tokens, agreement->bpe_tokens);
  }
  if (boundary) {
    std::vector<std::vector<std::string>> pred;
    for (const auto& w : boundary->gold) pred.push_back(boundary->segment(w.surface));
    rep.boundary = boundary_prf(boundary->gold, pred);
  }

  for (std::size_t i = 0; i < rep.models.size(); ++i) {
    std::map<std::string, std::vector<double>> metrics;
    for (const auto& sections : all) {
      const auto& s = sections[i];
      metrics["coverage"].push_back(s.similarity.summary.coverage);
      if (!s.similarity.summary.empty) metrics["mean_similarity"].push_back(s.similarity.summary.mean);
      if (!s.similarity.summary.empty) metrics["sd_similarity"].push_back(s.similarity.summary.sd);
      if (s.separation) metrics["separation_ratio"].push_back(s.separation->ratio);
      for (const auto& [r, d] : s.dropoffs) metrics["dropoff_1_" + std::to_string(r)].push_back(d);
    }
    for (auto& [name, values] : metrics) rep.across_runs[rep.models[i].name][name] = spread(std::move(values));
  }
  return rep;
}

std::string EvaluationReport::to_json_text() const {
  json j;
  j["schema_version"] = kReportSchemaVersion;
  j["entries"] = entries;
  j["runs"] = runs;
  j["options"] = json{{"queries", options.queries},
                      {"k", options.k},
                      {"seed", options.seed},
                      {"dropoff_ranks", options.dropoff_ranks},
                      {"max_inter_pairs", options.max_inter_pairs}};
  json ms = json::array();
  for (const auto& m : models) {
    json o;
    o["name"] = m.name;
    o["tokenizer"] = std::string(sgns::kind_name(m.kind));
    o["vocab_size"] = m.vocab_size;
    o["window"] = m.window;
    o["avg_tokens_per_word"] = num(m.avg_tokens_per_word);
    o["similarity"] = summary_json(m.similarity.summary);
    o["lemma_sources"] = sources_json(m.lemma_sources);
    o["wordform_sources"] = sources_json(m.wordform_sources);
    o["distribution"] = distribution_json(m.distribution);
    o["distribution_pattern"] = m.pattern;
    json curve = json::array();
    for (double x : m.curve.mean_similarity) curve.push_back(num(x));
    json drop = json::object();
    for (const auto& [r, d] : m.dropoffs) drop["1_" + std::to_string(r)] = num(d);
    o["neighbors"] = json{{"queries", m.curve.queries}, {"mean_similarity_by_rank", curve}, {"dropoff_percent", drop}};
    if (m.separation) {
      o["separation"] = json{{"lemmas", m.separation->lemmas},
                             {"intra_pairs", m.separation->intra.size()},
                             {"inter_pairs", m.separation->inter.size()},
                             {"inter_sampled", m.separation->inter_sampled},
                             {"mean_intra_distance", num(m.separation->mean_intra)},
                             {"mean_inter_distance", num(m.separation->mean_inter)},
                             {"ratio", num(m.separation->ratio)},
                             {"cohesion", m.cohesion}};
    } else {
      o["separation"] = json{{"error", m.separation_error}, {"cohesion", m.cohesion}};
    }
    ms.push_back(std::move(o));
  }
  j["models"] = std::move(ms);

  json ov = json::array();
  for (const auto& o : overlap) {
    ov.push_back(json{{"a", o.a}, {"b", o.b}, {"size_a", o.size_a}, {"size_b", o.size_b},
                      {"shared", o.shared}, {"percent_of_a", num(o.pct_of_a)}, {"percent_of_b", num(o.pct_of_b)}});
  }
  j["vocab_overlap"] = std::move(ov);

  json rest;
  rest["total"] = restricted.total;
  rest["intersection"] = restricted.intersection;
  rest["empty"] = restricted.empty;
  json rm = json::array();
  for (const auto& m : restricted.models) {
    rm.push_back(json{{"name", m.name}, {"similarity", summary_json(m.summary)},
                      {"distribution", distribution_json(m.distribution)}});
  }
  rest["models"] = std::move(rm);
  j["restricted"] = std::move(rest);

  if (agreement) {
    j["agreement"] = json{{"words", agreement->words},
                          {"mean", num(agreement->mean_agreement)},
                          {"zero_fraction", num(agreement->zero_fraction)},
                          {"partial_fraction", num(agreement->partial_fraction)},
                          {"perfect_fraction", num(agreement->perfect_fraction)},
                          {"morph_tokens_per_word", num(agreement->morph_tokens_per_word)},
                          {"bpe_tokens_per_word", num(agreement->bpe_tokens_per_word)}};
  } else {
    j["agreement"] = nullptr;
  }
  if (boundary) {
    json pos = json::object();
    for (const auto& [tag, acc] : boundary->per_pos) {
      pos[tag] = json{{"words", acc.words}, {"exact", acc.exact}, {"accuracy", num(acc.accuracy())}};
    }
    j["boundary"] = json{{"tp", boundary->tp},           {"fp", boundary->fp},
                         {"fn", boundary->fn},           {"precision", num(boundary->precision)},
                         {"recall", num(boundary->recall)}, {"f1", num(boundary->f1)},
                         {"words", boundary->words},     {"word_accuracy", num(boundary->word_accuracy)},
                         {"per_pos", pos}};
  } else {
    j["boundary"] = nullptr;
  }

  json ar = json::object();
  for (const auto& [model, metrics] : across_runs) {
    json mj = json::object();
    for (const auto& [name, s] : metrics) {
      json vals = json::array();
      for (double v : s.values) vals.push_back(num(v));
      mj[name] = json{{"mean", num(s.mean)}, {"sd", num(s.sd)}, {"values", vals}};
    }
    ar[model] = std::move(mj);
  }
  j["across_runs"] = std::move(ar);
  return j.dump(2) + "\n";
}

std::vector<std::filesystem::path> EvaluationReport::write(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> out;
  auto emit = [&](const std::string& name, const std::string& text) {
    write_file(dir / name, text);
    out.push_back(dir / name);
  };
  emit("report.json", to_json_text());

  std::ostringstream dist;
  dist << "model,bin_lo,bin_hi,count,fraction\n";
  for (const auto& m : models) {
    for (std::size_t b = 0; b < 3; ++b) {
      dist << m.name << ',' << kBinEdges[b] << ',' << kBinEdges[b + 1] << ',' << m.distribution.counts[b]
           << ',' << fmt(m.distribution.fractions[b]) << '\n';
    }
  }
  emit("distribution.csv", dist.str());

  std::ostringstream curve;
  curve << "model,rank,mean_similarity,dropoff_percent\n";
  for (const auto& m : models) {
    const auto& c = m.curve.mean_similarity;
    for (std::size_t r = 0; r < c.size(); ++r) {
      const double d = c.front() != 0.0 ? 100.0 * (c.front() - c[r]) / c.front() : 0.0;
      curve << m.name << ',' << r + 1 << ',' << fmt(c[r]) << ',' << fmt(d) << '\n';
    }
  }
  emit("dropoff_curve.csv", curve.str());

  std::ostringstream hist;
  hist << "model,kind,bin_lo,bin_hi,count\n";
  constexpr int kBins = 20;
  for (const auto& m : models) {
    if (!m.separation) continue;
    for (const auto& [kind, values] : {std::pair{"intra", &m.separation->intra}, std::pair{"inter", &m.separation->inter}}) {
      std::vector<std::size_t> counts(kBins, 0);
      for (double d : *values) {
        const int b = std::clamp(static_cast<int>(d / 2.0 * kBins), 0, kBins - 1);
        ++counts[static_cast<std::size_t>(b)];
      }
      for (int b = 0; b < kBins; ++b) {
        hist << m.name << ',' << kind << ',' << fmt(2.0 * b / kBins) << ',' << fmt(2.0 * (b + 1) / kBins) << ','
             << counts[static_cast<std::size_t>(b)] << '\n';
      }
    }
  }
  emit("distance_histogram.csv", hist.str());

  std::ostringstream recs;
  recs << "model,entry,similarity,lemma_source,wordform_source\n";
  for (const auto& m : models) {
    for (const auto& r : m.similarity.records) {
      recs << m.name << ',' << r.entry << ',' << (r.similarity ? fmt(*r.similarity) : std::string()) << ','
           << sgns::source_name(r.lemma_source) << ',' << sgns::source_name(r.wordform_source) << '\n';
    }
  }
  emit("similarity_records.csv", recs.str());
  return out;
}

}  // namespace morphtok::eval
