#include "morphtok/textnorm.hpp"

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <future>
#include <iomanip>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <unordered_map>

#include "json_config.hpp"

namespace morphtok::textnorm {
namespace {

constexpr std::u32string_view kScriptLetters =
    U"ئابپتجچحخدرڕزژ"
    U"سشعغفڤقکگلڵمنه"
    U"وۆیێە";

// Arabic letters that appear in loanwords; kept, but counted as foreign.
constexpr std::u32string_view kLoanLetters =
    U"ثذصضطظءأإؤآ";

constexpr std::u32string_view kDigitsAndPunct =
    U"0123456789٠١٢٣٤٥٦٧٨٩"
    U"۰۱۲۳۴۵۶۷۸۹"
    U".,!?:;()«»\"'-،؛؟٪";

constexpr std::u32string_view kDelimiters = U".!?؟؛";

bool is_space(Codepoint cp) {
  return cp == U' ' || cp == U'\t' || cp == U'\n' || cp == U'\r' || cp == U'\f' ||
         cp == U'\v' || cp == 0x00A0 || (cp >= 0x2000 && cp <= 0x200A) || cp == 0x202F ||
         cp == 0x205F || cp == 0x3000;
}

std::u32string nfc(const std::u32string& text) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* norm = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) throw std::runtime_error("ICU NFC normalizer unavailable");
  const std::string utf8 = encode_utf8(text);
  icu::UnicodeString src = icu::UnicodeString::fromUTF8(icu::StringPiece(utf8.data(),
                                                                         utf8.size()));
  if (norm->isNormalized(src, status) && U_SUCCESS(status)) return text;
  status = U_ZERO_ERROR;
  icu::UnicodeString dst = norm->normalize(src, status);
  if (U_FAILURE(status)) return text;
  std::string out;
  dst.toUTF8String(out);
  return decode_utf8(out);
}

std::u32string apply_rules_once(const std::u32string& text, const std::vector<CharRule>& rules) {
  std::u32string cur = text;
  for (const CharRule& rule : rules) {
    if (rule.source.empty()) continue;
    std::u32string next;
    next.reserve(cur.size());
    std::size_t i = 0;
    while (i < cur.size()) {
      if (cur.compare(i, rule.source.size(), rule.source) == 0) {
        next += rule.target;
        i += rule.source.size();
      } else {
        next.push_back(cur[i++]);
      }
    }
    cur = std::move(next);
  }
  return cur;
}

std::u32string fold_whitespace(std::u32string_view text) {
  std::u32string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (Codepoint cp : text) {
    if (is_space(cp)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(U' ');
    pending_space = false;
    out.push_back(cp);
  }
  return out;
}

CodepointSet to_set(std::u32string_view s) { return CodepointSet(s.begin(), s.end()); }

}  // namespace

std::vector<CharRule> default_char_map() {
  return {
      {U"\u0643", U"\u06A9"},          // Arabic kaf -> keheh
      {U"\u064A", U"\u06CC"},          // Arabic yeh -> Farsi yeh
      {U"\u0649", U"\u06CC"},          // alef maksura -> Farsi yeh
      {U"\u0647\u200C", U"\u06D5"},    // heh + ZWNJ spelling of ae
      {U"\u0629", U"\u06D5"},          // teh marbuta -> ae
      {U"\u06C0", U"\u06D5"},          // heh with yeh above -> ae
      {U"\u06BE", U"\u0647"},          // heh doachashmee -> heh
      {U"\u0640", U""},                // tatweel
      {U"\u200D", U""},                // ZWJ
      {U"\u200C", U""},                // ZWNJ
  };
}

NormalizationConfig default_config() {
  NormalizationConfig cfg;
  cfg.char_map = default_char_map();
  cfg.script_letters = to_set(kScriptLetters);
  cfg.allowed_chars = cfg.script_letters;
  for (Codepoint cp : kLoanLetters) cfg.allowed_chars.insert(cp);
  for (Codepoint cp : kDigitsAndPunct) cfg.allowed_chars.insert(cp);
  cfg.sentence_delimiters = to_set(kDelimiters);
  return cfg;
}

void NormalizationConfig::validate() const {
  if (max_repeat < 1) throw std::invalid_argument("max_repeat must be >= 1");
  if (min_sentence_chars < 0) throw std::invalid_argument("min_sentence_chars must be >= 0");
  if (min_tokens < 0) throw std::invalid_argument("min_tokens must be >= 0");
  if (!(fuzzy_dedup_threshold >= 0.0 && fuzzy_dedup_threshold <= 1.0)) {
    throw std::invalid_argument("fuzzy_dedup_threshold must lie in [0,1]");
  }
  if (!(dialect_foreign_ratio >= 0.0 && dialect_foreign_ratio <= 1.0)) {
    throw std::invalid_argument("dialect_foreign_ratio must lie in [0,1]");
  }
  if (dedup_window == 0) throw std::invalid_argument("dedup_window must be >= 1");
  for (const CharRule& r : char_map) {
    if (r.source.empty()) throw std::invalid_argument("char_map rule with empty source");
    const std::u32string once = apply_rules_once(r.source, char_map);
    if (apply_rules_once(once, char_map) != once) {
      throw std::invalid_argument("char_map is cyclic at source " +
                                  detail::format_codepoints(r.source));
    }
  }
}

std::u32string apply_char_map(std::u32string text, const std::vector<CharRule>& rules) {
  for (int pass = 0; pass < 16; ++pass) {
    std::u32string next = apply_rules_once(text, rules);
    if (next == text) break;
    text = std::move(next);
  }
  return text;
}

std::u32string collapse_repeats(std::u32string_view text, int max_repeat) {
  std::u32string out;
  out.reserve(text.size());
  int run = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    run = (i > 0 && text[i] == text[i - 1]) ? run + 1 : 1;
    if (run <= max_repeat) out.push_back(text[i]);
  }
  return out;
}

std::string normalize_line(std::string_view line, const NormalizationConfig& cfg,
                           std::size_t* dropped_chars) {
  std::u32string cur = decode_utf8(line);
  std::size_t dropped = 0;
  for (int iter = 0; iter < 8; ++iter) {
    const std::u32string start = cur;
    cur = nfc(cur);
    cur = apply_char_map(std::move(cur), cfg.char_map);
    std::u32string kept;
    kept.reserve(cur.size());
    for (Codepoint cp : cur) {
      if (is_space(cp) || cfg.allowed_chars.count(cp)) {
        kept.push_back(cp);
      } else {
        ++dropped;
      }
    }
    cur = collapse_repeats(fold_whitespace(kept), cfg.max_repeat);
    if (cur == start) break;
  }
  if (dropped_chars) *dropped_chars += dropped;
  return encode_utf8(cur);
}

std::string_view reason_name(FilterReason r) {
  switch (r) {
    case FilterReason::kKept: return "kept";
    case FilterReason::kTooShort: return "too_short";
    case FilterReason::kTooFewTokens: return "too_few_tokens";
    case FilterReason::kNoScriptLetters: return "no_script_letters";
    case FilterReason::kDialect: return "dialect";
  }
  return "unknown";
}

FilterDecision filter_sentence(std::string_view sentence, const NormalizationConfig& cfg) {
  const std::u32string cps = decode_utf8(sentence);
  FilterDecision d;
  std::size_t letters = 0, native = 0;
  for (Codepoint cp : cps) {
    if (cfg.script_letters.count(cp)) {
      ++letters;
      ++native;
    } else if (u_isalpha(static_cast<UChar32>(cp))) {
      ++letters;
    }
  }
  d.foreign_ratio = letters ? static_cast<double>(letters - native) / letters : 0.0;
  if (cps.size() < static_cast<std::size_t>(cfg.min_sentence_chars)) {
    d.reason = FilterReason::kTooShort;
  } else if (split_whitespace(sentence).size() < static_cast<std::size_t>(cfg.min_tokens)) {
    d.reason = FilterReason::kTooFewTokens;
  } else if (native == 0) {
    d.reason = FilterReason::kNoScriptLetters;
  } else if (d.foreign_ratio > cfg.dialect_foreign_ratio) {
    d.reason = FilterReason::kDialect;
  }
  d.keep = d.reason == FilterReason::kKept;
  return d;
}

CleanSentence make_sentence(std::string text, std::size_t source_line) {
  CleanSentence s;
  s.token_count = split_whitespace(text).size();
  s.text = std::move(text);
  s.source_line = source_line;
  return s;
}

std::vector<CleanSentence> segment_sentences(std::string_view document,
                                             const NormalizationConfig& cfg,
                                             std::size_t source_line) {
  std::vector<CleanSentence> out;
  const std::u32string cps = decode_utf8(document);
  std::u32string piece;
  auto flush = [&] {
    std::string text(trim(encode_utf8(piece)));
    if (!text.empty()) out.push_back(make_sentence(std::move(text), source_line));
    piece.clear();
  };
  for (Codepoint cp : cps) {
    if (cfg.sentence_delimiters.count(cp)) {
      flush();
    } else {
      piece.push_back(cp);
    }
  }
  flush();
  return out;
}

double token_jaccard(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::vector<std::string> sa(a), sb(b);
  std::sort(sa.begin(), sa.end());
  sa.erase(std::unique(sa.begin(), sa.end()), sa.end());
  std::sort(sb.begin(), sb.end());
  sb.erase(std::unique(sb.begin(), sb.end()), sb.end());
  if (sa.empty() && sb.empty()) return 1.0;
  std::vector<std::string> inter;
  std::set_intersection(sa.begin(), sa.end(), sb.begin(), sb.end(), std::back_inserter(inter));
  const double uni = static_cast<double>(sa.size() + sb.size() - inter.size());
  return static_cast<double>(inter.size()) / uni;
}

// Token ids grow in first-seen order; sets are sorted by descending id so the
// prefix of a set holds its most recently introduced (typically rarest) tokens.
struct NearDuplicateFilter::Impl {
  struct Entry {
    std::uint64_t seq;
    std::vector<std::uint32_t> tokens;
    std::size_t prefix;
  };

  explicit Impl(const NormalizationConfig& cfg)
      : threshold(cfg.fuzzy_dedup_threshold), window(cfg.dedup_window) {}

  std::size_t prefix_length(std::size_t n) const {
    const double need = std::ceil(threshold * static_cast<double>(n) - 1e-9);
    const auto overlap = static_cast<std::size_t>(std::max(need, 1.0));
    return n >= overlap ? n - overlap + 1 : 0;
  }

  std::vector<std::uint32_t> token_set(std::string_view text) {
    std::vector<std::uint32_t> ids;
    for (auto& tok : split_whitespace(text)) {
      auto [it, inserted] = vocab.try_emplace(tok, static_cast<std::uint32_t>(vocab.size()));
      ids.push_back(it->second);
    }
    std::sort(ids.begin(), ids.end(), std::greater<>());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    return ids;
  }

  static std::size_t overlap(const std::vector<std::uint32_t>& a,
                             const std::vector<std::uint32_t>& b) {
    std::size_t i = 0, j = 0, n = 0;
    while (i < a.size() && j < b.size()) {
      if (a[i] == b[j]) {
        ++n, ++i, ++j;
      } else if (a[i] > b[j]) {
        ++i;
      } else {
        ++j;
      }
    }
    return n;
  }

  void evict() {
    while (!entries.empty() && entries.front().seq + window < next_seq) {
      const Entry& e = entries.front();
      for (std::size_t k = 0; k < e.prefix; ++k) {
        auto it = postings.find(e.tokens[k]);
        it->second.pop_front();
        if (it->second.empty()) postings.erase(it);
      }
      entries.pop_front();
    }
  }

  bool fuzzy_match(const std::vector<std::uint32_t>& tokens) {
    if (tokens.empty() || entries.empty()) return false;
    if (threshold <= 0.0) return true;
    const std::uint64_t base = entries.front().seq;
    std::unordered_set<std::uint64_t> seen;
    const std::size_t p = prefix_length(tokens.size());
    for (std::size_t k = 0; k < p; ++k) {
      auto it = postings.find(tokens[k]);
      if (it == postings.end()) continue;
      for (std::uint64_t seq : it->second) {
        if (!seen.insert(seq).second) continue;
        const Entry& other = entries[seq - base];
        const std::size_t inter = overlap(tokens, other.tokens);
        const double uni = static_cast<double>(tokens.size() + other.tokens.size() - inter);
        if (static_cast<double>(inter) >= threshold * uni - 1e-12) return true;
      }
    }
    return false;
  }

  void insert(std::vector<std::uint32_t> tokens) {
    Entry e{next_seq++, std::move(tokens), 0};
    e.prefix = prefix_length(e.tokens.size());
    for (std::size_t k = 0; k < e.prefix; ++k) postings[e.tokens[k]].push_back(e.seq);
    entries.push_back(std::move(e));
    evict();
  }

  double threshold;
  std::size_t window;
  std::uint64_t next_seq = 0;
  std::unordered_set<std::string> exact;
  std::unordered_map<std::string, std::uint32_t> vocab;
  std::unordered_map<std::uint32_t, std::deque<std::uint64_t>> postings;
  std::deque<Entry> entries;
};

NearDuplicateFilter::NearDuplicateFilter(const NormalizationConfig& cfg)
    : impl_(std::make_unique<Impl>(cfg)) {}
NearDuplicateFilter::~NearDuplicateFilter() = default;
NearDuplicateFilter::NearDuplicateFilter(NearDuplicateFilter&&) noexcept = default;
NearDuplicateFilter& NearDuplicateFilter::operator=(NearDuplicateFilter&&) noexcept = default;

DedupVerdict NearDuplicateFilter::offer(std::string_view text) {
  if (impl_->exact.count(std::string(text))) return DedupVerdict::kExact;
  auto tokens = impl_->token_set(text);
  if (impl_->fuzzy_match(tokens)) return DedupVerdict::kFuzzy;
  impl_->exact.emplace(text);
  impl_->insert(std::move(tokens));
  return DedupVerdict::kUnique;
}

DedupResult dedup_corpus(const std::vector<CleanSentence>& sentences,
                         const NormalizationConfig& cfg) {
  DedupResult result;
  NearDuplicateFilter filter(cfg);
  for (const CleanSentence& s : sentences) {
    switch (filter.offer(s.text)) {
      case DedupVerdict::kUnique: result.kept.push_back(s); break;
      case DedupVerdict::kExact: ++result.exact_removed; break;
      case DedupVerdict::kFuzzy: ++result.fuzzy_removed; break;
    }
  }
  return result;
}

std::string CorpusStats::to_json_text() const {
  detail::json j;
  j["input_lines"] = input_lines;
  j["input_sentences"] = input_sentences;
  j["kept_sentences"] = kept_sentences;
  j["exact_dups_removed"] = exact_dups_removed;
  j["fuzzy_dups_removed"] = fuzzy_dups_removed;
  j["dialect_filtered"] = dialect_filtered;
  j["quality_filtered"] = quality_filtered;
  j["token_total"] = token_total;
  j["chars_dropped"] = chars_dropped;
  return j.dump(2) + "\n";
}

namespace {

struct LineOutcome {
  std::vector<CleanSentence> candidates;
  std::size_t sentences = 0;
  std::size_t quality = 0;
  std::size_t dialect = 0;
  std::size_t dropped = 0;
};

LineOutcome process_line(const std::string& raw, std::size_t line_no,
                         const NormalizationConfig& cfg, InputMode mode) {
  LineOutcome out;
  const std::string norm = normalize_line(raw, cfg, &out.dropped);
  std::vector<CleanSentence> pieces;
  if (mode == InputMode::kDocument) {
    pieces = segment_sentences(norm, cfg, line_no);
  } else {
    pieces.push_back(make_sentence(norm, line_no));
  }
  for (CleanSentence& s : pieces) {
    ++out.sentences;
    const FilterDecision d = filter_sentence(s.text, cfg);
    if (d.keep) {
      out.candidates.push_back(std::move(s));
    } else if (d.reason == FilterReason::kDialect) {
      ++out.dialect;
    } else {
      ++out.quality;
    }
  }
  return out;
}

}  // namespace

CorpusResult normalize_corpus(std::istream& in, const NormalizationConfig& cfg, InputMode mode,
                              unsigned threads) {
  cfg.validate();
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  std::vector<LineOutcome> outcomes(lines.size());
  threads = std::max(1u, threads);
  if (threads == 1 || lines.size() < 2 * threads) {
    for (std::size_t i = 0; i < lines.size(); ++i) {
      outcomes[i] = process_line(lines[i], i, cfg, mode);
    }
  } else {
    std::vector<std::future<void>> jobs;
    const std::size_t chunk = (lines.size() + threads - 1) / threads;
    for (std::size_t start = 0; start < lines.size(); start += chunk) {
      const std::size_t end = std::min(lines.size(), start + chunk);
      jobs.push_back(std::async(std::launch::async, [&, start, end] {
        for (std::size_t i = start; i < end; ++i) {
          outcomes[i] = process_line(lines[i], i, cfg, mode);
        }
      }));
    }
    for (auto& j : jobs) j.get();
  }

  CorpusResult result;
  CorpusStats& st = result.stats;
  st.input_lines = lines.size();
  NearDuplicateFilter filter(cfg);
  // Dedup is sequential over the kept stream in source order.
  for (LineOutcome& o : outcomes) {
    st.input_sentences += o.sentences;
    st.quality_filtered += o.quality;
    st.dialect_filtered += o.dialect;
    st.chars_dropped += o.dropped;
    for (CleanSentence& s : o.candidates) {
      switch (filter.offer(s.text)) {
        case DedupVerdict::kUnique:
          st.token_total += s.token_count;
          result.sentences.push_back(std::move(s));
          break;
        case DedupVerdict::kExact: ++st.exact_dups_removed; break;
        case DedupVerdict::kFuzzy: ++st.fuzzy_dups_removed; break;
      }
    }
  }
  st.kept_sentences = result.sentences.size();
  return result;
}

void write_sentences(const std::filesystem::path& path,
                     const std::vector<CleanSentence>& sentences) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (const CleanSentence& s : sentences) out << s.text << '\n';
}

void write_words(const std::filesystem::path& path, const std::vector<CleanSentence>& sentences) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (const CleanSentence& s : sentences) {
    for (const std::string& w : split_whitespace(s.text)) out << w << '\n';
  }
}

std::vector<CharRule> parse_char_map(std::string_view text) {
  std::vector<CharRule> rules;
  std::size_t line_no = 0;
  for (const std::string& raw : split_on(text, '\n')) {
    ++line_no;
    std::string line = raw;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    auto cols = split_on(line, '\t');
    CharRule rule;
    try {
      rule.source = detail::parse_codepoints(cols[0]);
      rule.target = cols.size() > 1 ? detail::parse_codepoints(cols[1]) : std::u32string{};
    } catch (const std::exception& e) {
      throw std::invalid_argument("char map line " + std::to_string(line_no) + ": " + e.what());
    }
    if (rule.source.empty()) {
      throw std::invalid_argument("char map line " + std::to_string(line_no) + ": empty source");
    }
    rules.push_back(std::move(rule));
  }
  return rules;
}

std::vector<CharRule> load_char_map(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open char map " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_char_map(ss.str());
}

NormalizationConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open config " + path.string());
  detail::json j = detail::json::parse(in);
  return detail::textnorm_from_json(j, path.parent_path());
}

NormalizationConfig config_from_json_text(std::string_view json_text) {
  return detail::textnorm_from_json(detail::json::parse(json_text), {});
}

std::string config_to_json_text(const NormalizationConfig& cfg) {
  return detail::textnorm_to_json(cfg).dump(2) + "\n";
}

}  // namespace morphtok::textnorm

namespace morphtok::detail {

std::string format_codepoints(std::u32string_view cps) {
  std::string out;
  for (Codepoint cp : cps) {
    if (!out.empty()) out.push_back(' ');
    std::ostringstream os;
    os << "U+" << std::uppercase << std::hex << std::setw(4) << std::setfill('0')
       << static_cast<std::uint32_t>(cp);
    out += os.str();
  }
  return out;
}

std::u32string parse_codepoints(std::string_view text) {
  std::u32string out;
  for (const std::string& tok : split_whitespace(text)) {
    if (tok.size() < 3 || (tok[0] != 'U' && tok[0] != 'u') || tok[1] != '+') {
      throw std::invalid_argument("expected U+XXXX, got '" + tok + "'");
    }
    std::size_t used = 0;
    const unsigned long v = std::stoul(tok.substr(2), &used, 16);
    if (used != tok.size() - 2 || v > 0x10FFFF) {
      throw std::invalid_argument("bad codepoint '" + tok + "'");
    }
    out.push_back(static_cast<Codepoint>(v));
  }
  return out;
}

namespace {

std::string set_to_string(const textnorm::CodepointSet& set) {
  std::u32string cps(set.begin(), set.end());
  std::sort(cps.begin(), cps.end());
  return encode_utf8(cps);
}

textnorm::CodepointSet string_to_set(const std::string& s) {
  textnorm::CodepointSet out;
  for (Codepoint cp : decode_utf8(s)) {
    if (cp != U' ') out.insert(cp);
  }
  return out;
}

}  // namespace

json textnorm_to_json(const textnorm::NormalizationConfig& cfg) {
  json j;
  json rules = json::array();
  for (const auto& r : cfg.char_map) {
    rules.push_back({format_codepoints(r.source), format_codepoints(r.target)});
  }
  j["char_map"] = rules;
  j["allowed_chars"] = set_to_string(cfg.allowed_chars);
  j["script_letters"] = set_to_string(cfg.script_letters);
  j["sentence_delimiters"] = set_to_string(cfg.sentence_delimiters);
  j["max_repeat"] = cfg.max_repeat;
  j["min_sentence_chars"] = cfg.min_sentence_chars;
  j["min_tokens"] = cfg.min_tokens;
  j["fuzzy_dedup_threshold"] = cfg.fuzzy_dedup_threshold;
  j["dialect_foreign_ratio"] = cfg.dialect_foreign_ratio;
  j["dedup_window"] = cfg.dedup_window;
  return j;
}

textnorm::NormalizationConfig textnorm_from_json(const json& j,
                                                 const std::filesystem::path& base_dir) {
  static const std::set<std::string> known{"char_map_file", "char_map", "allowed_chars", "script_letters",
                                           "sentence_delimiters", "max_repeat", "min_sentence_chars",
                                           "min_tokens", "fuzzy_dedup_threshold", "dialect_foreign_ratio",
                                           "dedup_window"};
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) throw std::invalid_argument("unknown textnorm key '" + key + "'");
  }
  textnorm::NormalizationConfig cfg = textnorm::default_config();
  if (j.contains("char_map_file")) {
    std::filesystem::path p = j.at("char_map_file").get<std::string>();
    if (p.is_relative()) p = base_dir / p;
    cfg.char_map = textnorm::load_char_map(p);
  }
  if (j.contains("char_map")) {
    cfg.char_map.clear();
    for (const auto& r : j.at("char_map")) {
      cfg.char_map.push_back({parse_codepoints(r.at(0).get<std::string>()),
                              parse_codepoints(r.at(1).get<std::string>())});
    }
  }
  if (j.contains("allowed_chars")) cfg.allowed_chars = string_to_set(j.at("allowed_chars"));
  if (j.contains("script_letters")) cfg.script_letters = string_to_set(j.at("script_letters"));
  if (j.contains("sentence_delimiters")) {
    cfg.sentence_delimiters = string_to_set(j.at("sentence_delimiters"));
  }
  cfg.max_repeat = j.value("max_repeat", cfg.max_repeat);
  cfg.min_sentence_chars = j.value("min_sentence_chars", cfg.min_sentence_chars);
  cfg.min_tokens = j.value("min_tokens", cfg.min_tokens);
  cfg.fuzzy_dedup_threshold = j.value("fuzzy_dedup_threshold", cfg.fuzzy_dedup_threshold);
  cfg.dialect_foreign_ratio = j.value("dialect_foreign_ratio", cfg.dialect_foreign_ratio);
  cfg.dedup_window = j.value("dedup_window", cfg.dedup_window);
  // Script letters always survive normalization.
  for (Codepoint cp : cfg.script_letters) cfg.allowed_chars.insert(cp);
  cfg.validate();
  return cfg;
}

}  // namespace morphtok::detail
