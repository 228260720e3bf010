#include "morphtok/segmenter_io.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

namespace morphtok::seg {
namespace {

void put_f64(std::string& out, double v) {
  auto bits = std::bit_cast<std::uint64_t>(v);
  for (int k = 0; k < 8; ++k) out.push_back(static_cast<char>((bits >> (8 * k)) & 0xFF));
}

double get_f64(const unsigned char* p) {
  std::uint64_t bits = 0;
  for (int k = 7; k >= 0; --k) bits = (bits << 8) | p[k];
  return std::bit_cast<double>(bits);
}

std::string fmt_double(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

std::map<std::string, std::string> parse_fields(std::string_view line) {
  std::map<std::string, std::string> out;
  for (const auto& tok : split_whitespace(line)) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos) throw std::runtime_error("model header: bad field '" + tok + "'");
    out[tok.substr(0, eq)] = tok.substr(eq + 1);
  }
  return out;
}

std::string take_line(std::string_view bytes, std::size_t& pos) {
  const auto nl = bytes.find('\n', pos);
  if (nl == std::string_view::npos) throw std::runtime_error("model file truncated");
  std::string line(bytes.substr(pos, nl - pos));
  pos = nl + 1;
  return line;
}

}  // namespace

std::string serialize_model(const SegmenterModel& model) {
  auto params = model.params;
  const auto views = tensors(params);
  std::size_t count = 0;
  for (const auto& t : views) count += t.values.size();
  const ModelShape& s = params.shape;
  std::string out;
  out += std::string(kModelMagic) + " " + std::to_string(kModelVersion) + "\n";
  out += "scheme=" + std::string(scheme_name(model.scheme)) + " char_dim=" +
         std::to_string(s.char_dim) + " hidden=" + std::to_string(s.hidden) +
         " layers=" + std::to_string(s.layers) + " vocab=" + std::to_string(s.vocab_size) +
         " labels=" + std::to_string(s.labels) + " dropout=" + fmt_double(params.dropout) +
         " params=" + std::to_string(count) + "\n";
  for (const auto& t : views) {
    for (double v : t.values) put_f64(out, v);
  }
  out += "\n#VOCAB " + std::to_string(model.vocab.chars().size()) + "\n";
  for (std::size_t i = 0; i < model.vocab.chars().size(); ++i) {
    if (i) out.push_back(' ');
    out += std::to_string(static_cast<std::uint32_t>(model.vocab.chars()[i]));
  }
  out += "\n";
  return out;
}

SegmenterModel deserialize_model(std::string_view bytes) {
  std::size_t pos = 0;
  const auto magic = split_whitespace(take_line(bytes, pos));
  if (magic.size() != 2 || magic[0] != kModelMagic) throw std::runtime_error("not an MTSEG model");
  if (std::stoi(magic[1]) != kModelVersion) {
    throw std::runtime_error("unsupported MTSEG version " + magic[1]);
  }
  auto f = parse_fields(take_line(bytes, pos));
  for (const char* key : {"scheme", "char_dim", "hidden", "layers", "vocab", "labels", "dropout", "params"}) {
    if (!f.count(key)) throw std::runtime_error(std::string("model header missing ") + key);
  }
  SegmenterModel model;
  model.scheme = parse_scheme(f["scheme"]);
  const ModelShape shape{std::stoi(f["vocab"]), std::stoi(f["char_dim"]), std::stoi(f["hidden"]),
                         std::stoi(f["layers"]), std::stoi(f["labels"])};
  if (shape.labels != kNumLabels) throw std::runtime_error("model must have 2 labels");
  model.params = SegmenterParams::zeros(shape, std::stod(f["dropout"]));
  auto views = tensors(model.params);
  std::size_t count = 0;
  for (const auto& t : views) count += t.values.size();
  if (std::to_string(count) != f["params"]) throw std::runtime_error("model parameter count mismatch");
  if (bytes.size() < pos + 8 * count) throw std::runtime_error("model tensors truncated");
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data() + pos);
  for (auto& t : views) {
    for (double& v : t.values) {
      v = get_f64(p);
      p += 8;
    }
  }
  pos += 8 * count;
  if (bytes.substr(pos, 1) != "\n") throw std::runtime_error("model: missing vocab section");
  ++pos;
  const auto vocab_header = split_whitespace(take_line(bytes, pos));
  if (vocab_header.size() != 2 || vocab_header[0] != "#VOCAB") {
    throw std::runtime_error("model: bad vocab header");
  }
  const auto n = static_cast<std::size_t>(std::stoul(vocab_header[1]));
  std::vector<Codepoint> chars;
  for (const auto& tok : split_whitespace(take_line(bytes, pos))) {
    chars.push_back(static_cast<Codepoint>(std::stoul(tok)));
  }
  if (chars.size() != n) throw std::runtime_error("model: vocab size mismatch");
  model.vocab = CharVocab(std::move(chars));
  if (model.vocab.size() != shape.vocab_size) throw std::runtime_error("model: vocab/embedding mismatch");
  if (!model.params.all_finite()) throw std::runtime_error("model: non-finite parameters");
  return model;
}

void save_model(const std::filesystem::path& path, const SegmenterModel& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  const std::string bytes = serialize_model(model);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

SegmenterModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open model " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return deserialize_model(ss.str());
}

std::string export_review(const SegmenterModel& model, const std::vector<std::string>& words) {
  std::string out = "# word\tproposed segmentation\tviterbi score\n";
  for (const auto& w : words) {
    if (w.empty()) continue;
    const Segmentation s = segment_word_scored(w, model);
    out += w + "\t" + join(s.morphemes, "-") + "\t" + fmt_double(s.viterbi_score) + "\n";
  }
  return out;
}

std::vector<AnnotatedWord> import_review(std::string_view text) {
  std::vector<AnnotatedWord> out;
  std::size_t line_no = 0;
  for (std::string line : split_on(text, '\n')) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty() || line[0] == '#') continue;
    const auto cols = split_on(line, '\t');
    const std::string where = "review line " + std::to_string(line_no) + ": ";
    if (cols.size() < 2) throw std::invalid_argument(where + "expected word<TAB>segmentation");
    if (cols.size() >= 3 && !trim(cols[2]).empty()) {
      const auto score = trim(cols[2]);
      double v = 0;
      auto [ptr, ec] = std::from_chars(score.data(), score.data() + score.size(), v);
      if (ec != std::errc{} || ptr != score.data() + score.size()) {
        throw std::invalid_argument(where + "score column is not a number");
      }
    }
    AnnotatedWord w;
    w.surface = std::string(trim(cols[0]));
    w.morphemes = split_morphemes(trim(cols[1]));
    if (cols.size() >= 4 && !trim(cols[3]).empty()) w.pos = parse_pos(trim(cols[3]));
    try {
      w.validate();
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument(where + e.what());
    }
    out.push_back(std::move(w));
  }
  return out;
}

std::vector<AnnotatedWord> merge_annotations(std::vector<AnnotatedWord> base,
                                             const std::vector<AnnotatedWord>& extra) {
  std::unordered_set<std::string> seen;
  for (const auto& w : base) seen.insert(w.surface);
  for (const auto& w : extra) {
    if (seen.insert(w.surface).second) base.push_back(w);
  }
  return base;
}

}  // namespace morphtok::seg
