#include "morphtok/evalsuite.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "morphtok/rng.hpp"
#include "morphtok/utf8.hpp"

namespace morphtok::eval {

void NeumaierSum::add(double x) {
  const double t = sum_ + x;
  if (std::abs(sum_) >= std::abs(x)) {
    comp_ += (sum_ - t) + x;
  } else {
    comp_ += (x - t) + sum_;
  }
  sum_ = t;
}

double mean_of(std::span<const double> xs) {
  if (xs.empty()) return 0.0;
  NeumaierSum s;
  for (double x : xs) s.add(x);
  return s.value() / static_cast<double>(xs.size());
}

double population_sd(std::span<const double> xs) {
  if (xs.empty()) return 0.0;
  const double m = mean_of(xs);
  NeumaierSum s;
  for (double x : xs) s.add((x - m) * (x - m));
  return std::sqrt(s.value() / static_cast<double>(xs.size()));
}

double cosine(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) throw std::invalid_argument("cosine: dimension mismatch");
  double dot = 0.0, nu = 0.0, nv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    nu += u[i] * u[i];
    nv += v[i] * v[i];
  }
  if (nu == 0.0 || nv == 0.0) throw std::domain_error("zero_norm");
  return std::clamp(dot / (std::sqrt(nu) * std::sqrt(nv)), -1.0, 1.0);
}

PosTag pos_from_features(const std::vector<std::string>& features) {
  return features.empty() ? PosTag::kOther : parse_pos(features.front());
}

std::vector<UniMorphEntry> parse_unimorph(std::string_view text) {
  std::vector<UniMorphEntry> out;
  std::size_t line_no = 0;
  for (std::string line : split_on(text, '\n')) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty() || line[0] == '#') continue;
    const auto cols = split_on(line, '\t');
    if (cols.size() < 2) {
      throw std::invalid_argument("unimorph line " + std::to_string(line_no) +
                                  ": expected lemma TAB wordform TAB features");
    }
    UniMorphEntry e;
    e.lemma = std::string(trim(cols[0]));
    e.wordform = std::string(trim(cols[1]));
    if (e.lemma.empty() || e.wordform.empty()) {
      throw std::invalid_argument("unimorph line " + std::to_string(line_no) +
                                  ": empty lemma or wordform");
    }
    if (cols.size() >= 3) {
      for (const auto& f : split_on(trim(cols[2]), ';')) {
        if (!trim(f).empty()) e.features.emplace_back(trim(f));
      }
    }
    e.pos = pos_from_features(e.features);
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<UniMorphEntry> load_unimorph(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_unimorph(ss.str());
}

SimilaritySummary summarize(const std::vector<SimilarityRecord>& records) {
  SimilaritySummary s;
  s.total = records.size();
  std::vector<double> sims;
  for (const auto& r : records) {
    if (r.similarity) sims.push_back(*r.similarity);
  }
  s.covered = sims.size();
  s.coverage = s.total ? static_cast<double>(s.covered) / static_cast<double>(s.total) : 0.0;
  s.empty = sims.empty();
  s.mean = mean_of(sims);
  s.sd = population_sd(sims);
  return s;
}

MorphSimilarity morph_similarity_eval(const std::vector<UniMorphEntry>& entries,
                                      const sgns::EmbeddingModel& model,
                                      const sgns::SubwordFn& subwords) {
  MorphSimilarity out;
  std::unordered_map<std::string, sgns::ResolvedVector> cache;
  auto resolve = [&](const std::string& w) -> const sgns::ResolvedVector& {
    auto it = cache.find(w);
    if (it == cache.end()) it = cache.emplace(w, sgns::vector_for(w, model, subwords)).first;
    return it->second;
  };
  for (std::size_t i = 0; i < entries.size(); ++i) {
    SimilarityRecord r;
    r.entry = i;
    r.model_kind = model.kind;
    const auto& a = resolve(entries[i].lemma);
    const auto& b = resolve(entries[i].wordform);
    r.lemma_source = a.source;
    r.wordform_source = b.source;
    if (a.covered() && b.covered()) {
      try {
        r.similarity = cosine(a.values, b.values);
      } catch (const std::domain_error&) {
        // A zero vector has no direction; treat the pair as not evaluable.
        r.lemma_source = a.values == std::vector<double>(a.values.size(), 0.0)
                             ? sgns::VectorSource::kUncovered
                             : a.source;
        r.wordform_source = b.values == std::vector<double>(b.values.size(), 0.0)
                                ? sgns::VectorSource::kUncovered
                                : b.source;
      }
    }
    out.records.push_back(r);
  }
  out.summary = summarize(out.records);
  return out;
}

double jaccard_agreement(const std::set<int>& a, const std::set<int>& b) {
  if (a.empty() && b.empty()) return 1.0;
  std::size_t inter = 0;
  for (int x : a) inter += b.count(x);
  const std::size_t uni = a.size() + b.size() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

AgreementReport agreement_summary(const std::vector<std::string>& words,
                                  const sgns::SubwordFn& morph_tokens,
                                  const sgns::SubwordFn& bpe_tokens) {
  AgreementReport r;
  r.words = words.size();
  if (words.empty()) return r;
  std::size_t zero = 0, perfect = 0;
  NeumaierSum morph_total, bpe_total;
  for (const auto& w : words) {
    const auto m = morph_tokens(w);
    const auto b = bpe_tokens(w);
    const double j = jaccard_agreement(interior_cuts(m), interior_cuts(b));
    r.per_word.push_back(j);
    if (j == 0.0) ++zero;
    if (j == 1.0) ++perfect;
    morph_total.add(static_cast<double>(m.size()));
    bpe_total.add(static_cast<double>(b.size()));
  }
  const auto n = static_cast<double>(words.size());
  r.mean_agreement = mean_of(r.per_word);
  r.zero_fraction = static_cast<double>(zero) / n;
  r.perfect_fraction = static_cast<double>(perfect) / n;
  r.partial_fraction = static_cast<double>(words.size() - zero - perfect) / n;
  r.morph_tokens_per_word = morph_total.value() / n;
  r.bpe_tokens_per_word = bpe_total.value() / n;
  return r;
}

namespace {

std::vector<double> row_norms(const sgns::MatrixF& m) {
  std::vector<double> norms(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    double s = 0.0;
    for (Eigen::Index d = 0; d < m.cols(); ++d) {
      const double x = m(i, d);
      s += x * x;
    }
    norms[static_cast<std::size_t>(i)] = std::sqrt(s);
  }
  return norms;
}

std::vector<Neighbor> knn_with_norms(const sgns::EmbeddingModel& model,
                                     const std::vector<double>& norms, std::size_t query,
                                     std::size_t k) {
  const auto& m = model.input;
  std::vector<Neighbor> all;
  all.reserve(static_cast<std::size_t>(m.rows()));
  const double nq = norms[query];
  if (nq == 0.0) return {};
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const auto iu = static_cast<std::size_t>(i);
    if (iu == query || norms[iu] == 0.0) continue;
    double dot = 0.0;
    for (Eigen::Index d = 0; d < m.cols(); ++d) {
      dot += static_cast<double>(m(static_cast<Eigen::Index>(query), d)) * static_cast<double>(m(i, d));
    }
    all.push_back({iu, std::clamp(dot / (nq * norms[iu]), -1.0, 1.0)});
  }
  const std::size_t take = std::min(k, all.size());
  std::partial_sort(all.begin(), all.begin() + static_cast<long>(take), all.end(),
                    [](const Neighbor& a, const Neighbor& b) {
                      return a.similarity != b.similarity ? a.similarity > b.similarity
                                                          : a.index < b.index;
                    });
  all.resize(take);
  return all;
}

}  // namespace

std::vector<Neighbor> nearest_neighbors(const sgns::EmbeddingModel& model, std::size_t query,
                                        std::size_t k) {
  if (query >= model.vocab.size()) throw std::out_of_range("nearest_neighbors: bad query index");
  return knn_with_norms(model, row_norms(model.input), query, k);
}

NeighborCurve neighbor_rank_curve(const sgns::EmbeddingModel& model, std::size_t query_sample_size,
                                  std::size_t k, std::uint64_t seed, std::uint64_t min_count) {
  if (k == 0) throw std::invalid_argument("neighbor_rank_curve: k must be >= 1");
  if (model.vocab.size() <= k) {
    throw std::invalid_argument("neighbor_rank_curve: vocabulary must be larger than k");
  }
  const auto norms = row_norms(model.input);
  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < model.vocab.size(); ++i) {
    if (model.vocab.count(i) >= min_count && norms[i] > 0.0) candidates.push_back(i);
  }
  Rng rng(seed);
  rng.shuffle(candidates);
  candidates.resize(std::min(candidates.size(), query_sample_size));
  std::sort(candidates.begin(), candidates.end());

  std::vector<NeumaierSum> sums(k);
  std::vector<std::size_t> counts(k, 0);
  NeighborCurve curve;
  for (std::size_t q : candidates) {
    const auto nn = knn_with_norms(model, norms, q, k);
    for (std::size_t r = 0; r < nn.size(); ++r) {
      sums[r].add(nn[r].similarity);
      ++counts[r];
    }
    ++curve.queries;
  }
  for (std::size_t r = 0; r < k; ++r) {
    curve.mean_similarity.push_back(counts[r] ? sums[r].value() / static_cast<double>(counts[r]) : 0.0);
  }
  return curve;
}

double dropoff(const std::vector<double>& curve, std::size_t rank) {
  if (rank == 0 || rank > curve.size()) throw std::out_of_range("dropoff: rank outside curve");
  const double s1 = curve.front();
  if (s1 == 0.0) throw std::domain_error("dropoff: rank-1 similarity is zero");
  return 100.0 * (s1 - curve[rank - 1]) / s1;
}

double separation_ratio(std::span<const double> intra, std::span<const double> inter) {
  if (intra.empty() || inter.empty()) throw std::invalid_argument("separation_ratio: empty distribution");
  const double mi = mean_of(intra);
  if (mi == 0.0) throw std::domain_error("separation_ratio: zero intra-lemma distance");
  return mean_of(inter) / mi;
}

SeparationResult allomorph_separation(const std::vector<UniMorphEntry>& entries,
                                      const sgns::EmbeddingModel& model,
                                      const sgns::SubwordFn& subwords, std::uint64_t seed,
                                      std::size_t max_inter) {
  // lemma -> distinct covered forms, in first-seen order
  std::vector<std::string> lemma_order;
  std::unordered_map<std::string, std::vector<std::vector<double>>> groups;
  std::unordered_map<std::string, std::unordered_set<std::string>> seen;
  for (const auto& e : entries) {
    if (!seen[e.lemma].insert(e.wordform).second) continue;
    auto v = sgns::vector_for(e.wordform, model, subwords);
    if (!v.covered()) continue;
    bool nonzero = std::any_of(v.values.begin(), v.values.end(), [](double x) { return x != 0.0; });
    if (!nonzero) continue;
    auto& g = groups[e.lemma];
    if (g.empty()) lemma_order.push_back(e.lemma);
    g.push_back(std::move(v.values));
  }
  std::vector<const std::vector<std::vector<double>>*> usable;
  for (const auto& l : lemma_order) {
    if (groups[l].size() >= 2) usable.push_back(&groups[l]);
  }
  if (usable.size() < 2) {
    throw std::invalid_argument("allomorph_separation: need two lemmas with two covered forms each");
  }
  SeparationResult r;
  r.lemmas = usable.size();
  for (const auto* g : usable) {
    for (std::size_t i = 0; i < g->size(); ++i) {
      for (std::size_t j = i + 1; j < g->size(); ++j) r.intra.push_back(1.0 - cosine((*g)[i], (*g)[j]));
    }
  }
  // flat index of forms for inter-lemma pairs
  std::vector<std::pair<std::size_t, std::size_t>> forms;  // (group, form)
  for (std::size_t gi = 0; gi < usable.size(); ++gi) {
    for (std::size_t fi = 0; fi < usable[gi]->size(); ++fi) forms.emplace_back(gi, fi);
  }
  auto form = [&](std::size_t k) -> const std::vector<double>& {
    return (*usable[forms[k].first])[forms[k].second];
  };
  std::size_t same = 0;
  for (const auto* g : usable) same += g->size() * (g->size() - 1) / 2;
  const std::size_t total_pairs = forms.size() * (forms.size() - 1) / 2 - same;
  if (total_pairs <= max_inter) {
    for (std::size_t a = 0; a < forms.size(); ++a) {
      for (std::size_t b = a + 1; b < forms.size(); ++b) {
        if (forms[a].first != forms[b].first) r.inter.push_back(1.0 - cosine(form(a), form(b)));
      }
    }
  } else {
    r.inter_sampled = true;
    Rng rng(seed);
    while (r.inter.size() < max_inter) {
      const std::size_t a = rng.below(forms.size());
      const std::size_t b = rng.below(forms.size());
      if (forms[a].first == forms[b].first) continue;
      r.inter.push_back(1.0 - cosine(form(a), form(b)));
    }
  }
  r.mean_intra = mean_of(r.intra);
  r.mean_inter = mean_of(r.inter);
  r.ratio = separation_ratio(r.intra, r.inter);
  return r;
}

Distribution similarity_distribution(std::span<const double> sims) {
  Distribution d;
  for (double s : sims) {
    if (s < kBinEdges[1]) {
      ++d.counts[0];
    } else if (s < kBinEdges[2]) {
      ++d.counts[1];
    } else {
      ++d.counts[2];
    }
  }
  d.empty = sims.empty();
  if (!d.empty) {
    for (std::size_t b = 0; b < 3; ++b) {
      d.fractions[b] = static_cast<double>(d.counts[b]) / static_cast<double>(sims.size());
    }
  }
  return d;
}

Distribution similarity_distribution(const std::vector<SimilarityRecord>& records) {
  std::vector<double> sims;
  for (const auto& r : records) {
    if (r.similarity) sims.push_back(*r.similarity);
  }
  return similarity_distribution(sims);
}

std::vector<Overlap> vocab_overlap(const std::vector<NamedVocab>& vocabs) {
  if (vocabs.size() < 2) throw std::invalid_argument("vocab_overlap: need at least two vocabularies");
  std::vector<std::unordered_set<std::string>> sets;
  for (const auto& v : vocabs) sets.emplace_back(v.tokens.begin(), v.tokens.end());
  std::vector<Overlap> out;
  for (std::size_t i = 0; i < vocabs.size(); ++i) {
    for (std::size_t j = i + 1; j < vocabs.size(); ++j) {
      Overlap o;
      o.a = vocabs[i].name;
      o.b = vocabs[j].name;
      o.size_a = sets[i].size();
      o.size_b = sets[j].size();
      for (const auto& t : sets[i]) o.shared += sets[j].count(t);
      o.pct_of_a = o.size_a ? 100.0 * static_cast<double>(o.shared) / static_cast<double>(o.size_a) : 0.0;
      o.pct_of_b = o.size_b ? 100.0 * static_cast<double>(o.shared) / static_cast<double>(o.size_b) : 0.0;
      out.push_back(o);
    }
  }
  return out;
}

BoundaryReport boundary_prf_from_counts(std::size_t tp, std::size_t fp, std::size_t fn) {
  BoundaryReport r;
  r.tp = tp;
  r.fp = fp;
  r.fn = fn;
  r.precision = tp + fp ? static_cast<double>(tp) / static_cast<double>(tp + fp) : (fn == 0 ? 1.0 : 0.0);
  r.recall = tp + fn ? static_cast<double>(tp) / static_cast<double>(tp + fn) : (fp == 0 ? 1.0 : 0.0);
  r.f1 = r.precision + r.recall > 0.0 ? 2.0 * r.precision * r.recall / (r.precision + r.recall) : 0.0;
  return r;
}

BoundaryReport boundary_prf(const std::vector<AnnotatedWord>& gold,
                            const std::vector<std::vector<std::string>>& predicted) {
  if (gold.size() != predicted.size()) {
    throw std::invalid_argument("boundary_prf: gold has " + std::to_string(gold.size()) +
                                " words, predictions have " + std::to_string(predicted.size()));
  }
  std::size_t tp = 0, fp = 0, fn = 0, exact = 0;
  std::map<std::string, PosAccuracy> per_pos;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (join(predicted[i], "") != gold[i].surface) {
      throw std::invalid_argument("boundary_prf: prediction " + std::to_string(i) +
                                  " does not spell '" + gold[i].surface + "'");
    }
    const auto g = interior_cuts(gold[i].morphemes);
    const auto p = interior_cuts(predicted[i]);
    std::size_t hit = 0;
    for (int c : p) hit += g.count(c);
    tp += hit;
    fp += p.size() - hit;
    fn += g.size() - hit;
    const bool ok = g == p;
    exact += ok ? 1 : 0;
    auto& acc = per_pos[std::string(pos_name(gold[i].pos.value_or(PosTag::kOther)))];
    ++acc.words;
    acc.exact += ok ? 1 : 0;
  }
  BoundaryReport r = boundary_prf_from_counts(tp, fp, fn);
  r.words = gold.size();
  r.word_accuracy = gold.empty() ? 0.0 : static_cast<double>(exact) / static_cast<double>(gold.size());
  r.per_pos = std::move(per_pos);
  return r;
}

RestrictedComparison restricted_comparison(
    const std::vector<std::pair<std::string, std::vector<SimilarityRecord>>>& per_model) {
  if (per_model.size() < 2) throw std::invalid_argument("restricted_comparison: need two models");
  RestrictedComparison rc;
  rc.total = per_model.front().second.size();
  for (const auto& [name, recs] : per_model) {
    if (recs.size() != rc.total) {
      throw std::invalid_argument("restricted_comparison: model '" + name +
                                  "' was evaluated on a different entry list");
    }
  }
  std::vector<bool> keep(rc.total, true);
  for (const auto& [name, recs] : per_model) {
    for (std::size_t i = 0; i < rc.total; ++i) {
      if (recs[i].entry != per_model.front().second[i].entry) {
        throw std::invalid_argument("restricted_comparison: entry order differs for '" + name + "'");
      }
      keep[i] = keep[i] && recs[i].similarity.has_value();
    }
  }
  rc.intersection = static_cast<std::size_t>(std::count(keep.begin(), keep.end(), true));
  rc.empty = rc.intersection == 0;
  for (const auto& [name, recs] : per_model) {
    std::vector<SimilarityRecord> subset;
    for (std::size_t i = 0; i < rc.total; ++i) {
      if (keep[i]) subset.push_back(recs[i]);
    }
    RestrictedModel m;
    m.name = name;
    m.summary = summarize(subset);
    m.distribution = similarity_distribution(subset);
    rc.models.push_back(std::move(m));
  }
  return rc;
}

}  // namespace morphtok::eval
