#include "morphtok/labels.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "morphtok/utf8.hpp"

namespace morphtok {

std::string_view scheme_name(LabelScheme s) {
  return s == LabelScheme::kEndOnly ? "end" : "both";
}

LabelScheme parse_scheme(std::string_view name) {
  if (name == "end" || name == "end_only") return LabelScheme::kEndOnly;
  if (name == "both" || name == "both_ends") return LabelScheme::kBothEnds;
  throw std::invalid_argument("unknown label scheme '" + std::string(name) + "'");
}

std::string_view pos_name(PosTag p) {
  switch (p) {
    case PosTag::kNoun: return "N";
    case PosTag::kAdjective: return "ADJ";
    case PosTag::kVerb: return "V";
    case PosTag::kOther: return "OTHER";
  }
  return "OTHER";
}

PosTag parse_pos(std::string_view tag) {
  std::string up;
  for (char c : tag) up.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  if (up == "N" || up == "NOUN") return PosTag::kNoun;
  if (up == "ADJ" || up == "ADJECTIVE") return PosTag::kAdjective;
  if (up == "V" || up == "VERB") return PosTag::kVerb;
  return PosTag::kOther;
}

void AnnotatedWord::validate() const {
  if (surface.empty()) throw std::invalid_argument("empty surface");
  if (morphemes.empty()) throw std::invalid_argument("no morphemes for '" + surface + "'");
  std::string cat;
  for (const auto& m : morphemes) {
    if (m.empty()) throw std::invalid_argument("empty morpheme in '" + surface + "'");
    cat += m;
  }
  if (cat != surface) {
    throw std::invalid_argument("morphemes '" + join(morphemes, "-") +
                                "' do not concatenate to '" + surface + "'");
  }
}

std::vector<int> boundary_labels(const AnnotatedWord& word, LabelScheme scheme) {
  word.validate();
  std::vector<int> labels;
  for (const auto& m : word.morphemes) {
    const std::size_t len = codepoint_length(m);
    const std::size_t first = labels.size();
    labels.resize(first + len, 0);
    labels[first + len - 1] = 1;
    if (scheme == LabelScheme::kBothEnds) labels[first] = 1;
  }
  return labels;
}

std::vector<std::string> labels_to_morphemes(const std::vector<std::string>& chars,
                                             const std::vector<int>& labels, LabelScheme scheme) {
  if (chars.size() != labels.size()) {
    throw std::invalid_argument("labels_to_morphemes: length mismatch");
  }
  const std::size_t n = chars.size();
  std::vector<std::string> out;
  auto emit = [&](std::size_t from, std::size_t to) {  // inclusive range
    std::string m;
    for (std::size_t k = from; k <= to; ++k) m += chars[k];
    out.push_back(std::move(m));
  };
  if (n == 0) return out;

  if (scheme == LabelScheme::kEndOnly) {
    std::size_t start = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (labels[i] == 1 || i + 1 == n) {
        emit(start, i);
        start = i + 1;
      }
    }
    return out;
  }

  std::size_t i = 0;
  while (i < n) {
    const std::size_t j = i + 1;
    if (j == n) {
      emit(i, i);
      break;
    }
    if (labels[i] == 0 || labels[j] == 0) {
      // Long morpheme: extend through the zero run to the next closing 1.
      std::size_t k = j;
      while (k < n && labels[k] == 0) ++k;
      const std::size_t end = (k < n) ? k : n - 1;
      emit(i, end);
      i = end + 1;
    } else if (j + 1 < n && labels[j + 1] == 0) {
      // j opens a long morpheme, so i stands alone.
      emit(i, i);
      i = j;
    } else {
      emit(i, j);
      i = j + 1;
    }
  }
  return out;
}

std::set<int> interior_cuts(const std::vector<std::string>& morphemes) {
  std::set<int> cuts;
  int pos = 0;
  for (std::size_t k = 0; k + 1 < morphemes.size(); ++k) {
    pos += static_cast<int>(codepoint_length(morphemes[k]));
    cuts.insert(pos);
  }
  return cuts;
}

std::vector<std::string> split_morphemes(std::string_view joined, char sep) {
  return split_on(joined, sep);
}

std::vector<AnnotatedWord> parse_annotations(std::string_view text) {
  std::vector<AnnotatedWord> out;
  std::size_t line_no = 0;
  for (const std::string& raw : split_on(text, '\n')) {
    ++line_no;
    std::string line = raw;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty() || line[0] == '#') continue;
    auto cols = split_on(line, '\t');
    if (cols.size() < 2) {
      throw std::invalid_argument("line " + std::to_string(line_no) +
                                  ": expected 'surface<TAB>m1-m2-...'");
    }
    AnnotatedWord w;
    w.surface = std::string(trim(cols[0]));
    w.morphemes = split_morphemes(trim(cols[1]));
    if (cols.size() >= 3 && !trim(cols[2]).empty()) w.pos = parse_pos(trim(cols[2]));
    try {
      w.validate();
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("line " + std::to_string(line_no) + ": " + e.what());
    }
    out.push_back(std::move(w));
  }
  return out;
}

std::vector<AnnotatedWord> load_annotations(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open annotations " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_annotations(ss.str());
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(path.string() + ": " + e.what());
  }
}

std::string format_annotation(const AnnotatedWord& w) {
  std::string line = w.surface + "\t" + join(w.morphemes, "-");
  if (w.pos) {
    line += "\t";
    line += pos_name(*w.pos);
  }
  return line;
}

void save_annotations(const std::filesystem::path& path, const std::vector<AnnotatedWord>& words) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (const auto& w : words) out << format_annotation(w) << '\n';
}

}  // namespace morphtok
