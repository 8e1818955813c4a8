#include "trackforge/io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <type_traits>

#include "json.hpp"

#include "trackforge/error.hpp"

namespace trackforge {

static_assert(std::numeric_limits<float>::is_iec559, "EMB1 requires IEEE-754 float32");

namespace {

std::function<void(std::string_view)>& warning_handler() {
  static std::function<void(std::string_view)> handler = [](std::string_view msg) {
    std::cerr << "warning: " << msg << '\n';
  };
  return handler;
}

std::ifstream open_text(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  return in;
}

std::ofstream create_text(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

struct Line {
  std::size_t number = 0;
  std::vector<std::string_view> fields;
};

class LineReader {
 public:
  LineReader(std::istream& in, std::string source) : in_(in), source_(std::move(source)) {}

  // Next non-blank line, split on commas.
  bool next(Line& line) {
    while (std::getline(in_, buf_)) {
      ++number_;
      const std::string_view t = trim(buf_);
      if (t.empty()) continue;
      line.number = number_;
      line.fields.clear();
      std::size_t start = 0;
      for (;;) {
        const std::size_t comma = t.find(',', start);
        line.fields.push_back(trim(t.substr(start, comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
      }
      return true;
    }
    return false;
  }

  [[noreturn]] void fail(const Line& line, const std::string& what) const {
    throw Error(ErrorKind::Parse, source_ + ":" + std::to_string(line.number) + ": " + what);
  }

  double real(const Line& line, std::size_t i, const char* name) const {
    const std::string_view f = line.fields[i];
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
    if (ec != std::errc() || ptr != f.data() + f.size() || !std::isfinite(v)) {
      fail(line, std::string("field '") + name + "' is not a finite number");
    }
    return v;
  }

  int integer(const Line& line, std::size_t i, const char* name) const {
    const double v = real(line, i, name);
    if (v != std::floor(v) || v < std::numeric_limits<int>::min() ||
        v > std::numeric_limits<int>::max()) {
      fail(line, std::string("field '") + name + "' is not an integer");
    }
    return static_cast<int>(v);
  }

  const std::string& source() const { return source_; }

 private:
  std::istream& in_;
  std::string source_;
  std::string buf_;
  std::size_t number_ = 0;
};

BoundingBox read_box(const LineReader& r, const Line& line) {
  BoundingBox b{r.real(line, 2, "x"), r.real(line, 3, "y"), r.real(line, 4, "w"),
                r.real(line, 5, "h")};
  if (b.w <= 0.0 || b.h <= 0.0) r.fail(line, "box width and height must be positive");
  return b;
}

std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  // Avoid emitting "-0.000000".
  if (std::strcmp(buf, "-0.000000") == 0) return "0.000000";
  return buf;
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

std::uint32_t get_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

struct TrackLine {
  int frame;
  int id;
  const TrackRecord* record;
  const Embedding* feature;
};

// Track-file line order: (frame, id).
std::vector<TrackLine> track_lines(const TrackSet& tracks) {
  std::vector<TrackLine> lines;
  lines.reserve(tracks.record_count());
  for (const auto& t : tracks.tracklets) {
    std::size_t e = 0;
    for (const auto& r : t.records) {
      while (e < t.embeddings.size() && t.embeddings[e].frame < r.frame) ++e;
      const Embedding* f = (e < t.embeddings.size() && t.embeddings[e].frame == r.frame)
                               ? &t.embeddings[e].embedding
                               : nullptr;
      lines.push_back(TrackLine{r.frame, t.id, &r, f});
    }
  }
  std::sort(lines.begin(), lines.end(), [](const TrackLine& a, const TrackLine& b) {
    return a.frame != b.frame ? a.frame < b.frame : a.id < b.id;
  });
  return lines;
}

}  // namespace

void set_warning_handler(std::function<void(std::string_view)> handler) {
  warning_handler() = std::move(handler);
}

void warn(std::string_view message) {
  if (warning_handler()) warning_handler()(message);
}

std::vector<Detection> parse_detections(std::istream& in, const std::string& source) {
  LineReader reader(in, source);
  std::vector<Detection> dets;
  Line line;
  while (reader.next(line)) {
    if (line.fields.size() < 7) reader.fail(line, "expected at least 7 comma-separated fields");
    Detection d;
    d.frame = reader.integer(line, 0, "frame");
    if (d.frame < 1) reader.fail(line, "frame must be >= 1");
    reader.real(line, 1, "id");
    d.box = read_box(reader, line);
    d.confidence = reader.real(line, 6, "conf");
    if (d.confidence < 0.0 || d.confidence > 1.0) reader.fail(line, "conf must lie in [0, 1]");
    d.embedding_index = dets.size();
    dets.push_back(d);
  }
  if (dets.empty()) warn(source + ": no detections");
  std::stable_sort(dets.begin(), dets.end(),
                   [](const Detection& a, const Detection& b) { return a.frame < b.frame; });
  return dets;
}

std::vector<Detection> read_detections(const std::filesystem::path& path) {
  auto in = open_text(path);
  return parse_detections(in, path.string());
}

RawEmbeddings read_embedding_rows(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  if (bytes.size() < 16) throw Error(ErrorKind::Io, path.string() + ": truncated EMB1 header");
  if (std::memcmp(p, "EMB1", 4) != 0) {
    throw Error(ErrorKind::Format, path.string() + ": bad magic (expected EMB1)");
  }
  const std::uint32_t version = get_u32(p + 4);
  if (version != 1) {
    throw Error(ErrorKind::Format,
                path.string() + ": unsupported EMB1 version " + std::to_string(version));
  }
  const std::uint64_t count = get_u32(p + 8);
  const std::uint64_t dim = get_u32(p + 12);
  const std::uint64_t need = 16 + count * dim * 4;
  if (bytes.size() < need) {
    throw Error(ErrorKind::Io, path.string() + ": truncated payload (" +
                                   std::to_string(bytes.size()) + " of " + std::to_string(need) +
                                   " bytes)");
  }
  if (bytes.size() > need) {
    throw Error(ErrorKind::Format, path.string() + ": trailing bytes after payload");
  }
  RawEmbeddings out;
  out.dim = static_cast<std::size_t>(dim);
  out.rows.resize(static_cast<std::size_t>(count), std::vector<float>(out.dim));
  const unsigned char* q = p + 16;
  for (auto& row : out.rows) {
    for (auto& v : row) {
      v = std::bit_cast<float>(get_u32(q));
      q += 4;
      if (!std::isfinite(v)) {
        throw Error(ErrorKind::Data, path.string() + ": non-finite value in embedding payload");
      }
    }
  }
  return out;
}

void write_embedding_rows(const std::filesystem::path& path, std::size_t dim,
                          const std::vector<std::vector<float>>& rows) {
  std::string out;
  out.reserve(16 + rows.size() * dim * 4);
  out.append("EMB1");
  put_u32(out, 1);
  put_u32(out, static_cast<std::uint32_t>(rows.size()));
  put_u32(out, static_cast<std::uint32_t>(dim));
  for (const auto& row : rows) {
    if (row.size() != dim) {
      throw Error(ErrorKind::DimensionMismatch, "embedding row length differs from dim");
    }
    for (float v : row) put_u32(out, std::bit_cast<std::uint32_t>(v));
  }
  auto f = create_text(path);
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw Error(ErrorKind::Io, "failed writing " + path.string());
}

EmbeddingTable read_embeddings(const std::filesystem::path& path, std::size_t expected_count) {
  RawEmbeddings raw = read_embedding_rows(path);
  if (raw.rows.size() != expected_count) {
    throw Error(ErrorKind::Consistency,
                path.string() + ": holds " + std::to_string(raw.rows.size()) +
                    " embeddings but the detections file has " +
                    std::to_string(expected_count) + " lines");
  }
  if (!raw.rows.empty() && raw.dim == 0) {
    throw Error(ErrorKind::Format, path.string() + ": zero embedding dimension");
  }
  std::vector<Embedding> rows;
  rows.reserve(raw.rows.size());
  for (std::size_t i = 0; i < raw.rows.size(); ++i) {
    try {
      rows.push_back(Embedding::normalize(std::span<const float>(raw.rows[i])));
    } catch (const Error& e) {
      throw Error(ErrorKind::Data, path.string() + ": row " + std::to_string(i) + ": " + e.what());
    }
  }
  return EmbeddingTable(raw.dim, std::move(rows));
}

SequenceBundle load_sequence(const std::filesystem::path& detections,
                             const std::filesystem::path& embeddings) {
  SequenceBundle b;
  b.detections = read_detections(detections);
  b.embeddings = read_embeddings(embeddings, b.detections.size());
  b.frame_count = b.detections.empty() ? 0 : b.detections.back().frame;
  b.detections_path = detections.string();
  b.embeddings_path = embeddings.string();
  return b;
}

void write_detections(const std::filesystem::path& path, const std::vector<Detection>& dets) {
  std::string out;
  for (const auto& d : dets) {
    out += std::to_string(d.frame) + ",-1," + fixed6(d.box.x) + "," + fixed6(d.box.y) + "," +
           fixed6(d.box.w) + "," + fixed6(d.box.h) + "," + fixed6(d.confidence) + ",-1,-1,-1\n";
  }
  auto f = create_text(path);
  f << out;
  if (!f) throw Error(ErrorKind::Io, "failed writing " + path.string());
}

std::string format_tracks(const TrackSet& tracks) {
  std::string out;
  for (const auto& l : track_lines(tracks)) {
    const TrackRecord& r = *l.record;
    out += std::to_string(l.frame) + "," + std::to_string(l.id) + "," + fixed6(r.box.x) + "," +
           fixed6(r.box.y) + "," + fixed6(r.box.w) + "," + fixed6(r.box.h) + "," +
           fixed6(r.confidence) + ",-1,-1,-1\n";
  }
  return out;
}

void write_tracks(const TrackSet& tracks, const std::filesystem::path& path) {
  auto f = create_text(path);
  f << format_tracks(tracks);
  if (!f) throw Error(ErrorKind::Io, "failed writing " + path.string());
}

void write_track_embeddings(const TrackSet& tracks, const std::filesystem::path& path) {
  const auto lines = track_lines(tracks);
  std::size_t dim = 0;
  for (const auto& l : lines) {
    if (l.feature != nullptr) {
      dim = l.feature->dim();
      break;
    }
  }
  std::vector<std::vector<float>> rows;
  rows.reserve(lines.size());
  for (const auto& l : lines) {
    std::vector<float> row(dim, 0.0f);
    if (l.feature != nullptr) {
      const auto v = l.feature->values();
      for (std::size_t i = 0; i < dim; ++i) row[i] = static_cast<float>(v[i]);
    }
    rows.push_back(std::move(row));
  }
  write_embedding_rows(path, dim, rows);
}

TrackSet read_tracks(const std::filesystem::path& path,
                     const std::optional<std::filesystem::path>& history) {
  auto in = open_text(path);
  LineReader reader(in, path.string());
  struct Parsed {
    int frame;
    int id;
    TrackRecord record;
  };
  std::vector<Parsed> parsed;
  std::set<std::pair<int, int>> seen;
  Line line;
  while (reader.next(line)) {
    if (line.fields.size() < 7) reader.fail(line, "expected at least 7 comma-separated fields");
    Parsed p;
    p.frame = reader.integer(line, 0, "frame");
    if (p.frame < 1) reader.fail(line, "frame must be >= 1");
    p.id = reader.integer(line, 1, "id");
    if (p.id < 1) reader.fail(line, "track id must be >= 1");
    p.record = TrackRecord{p.frame, read_box(reader, line), reader.real(line, 6, "conf")};
    if (!seen.emplace(p.frame, p.id).second) reader.fail(line, "duplicate (frame, id)");
    parsed.push_back(p);
  }

  std::vector<std::optional<Embedding>> features(parsed.size());
  if (history) {
    RawEmbeddings raw = read_embedding_rows(*history);
    if (raw.rows.size() != parsed.size()) {
      throw Error(ErrorKind::Consistency,
                  history->string() + ": holds " + std::to_string(raw.rows.size()) +
                      " rows but the track file has " + std::to_string(parsed.size()) + " lines");
    }
    for (std::size_t i = 0; i < raw.rows.size(); ++i) {
      const auto& row = raw.rows[i];
      if (std::all_of(row.begin(), row.end(), [](float v) { return v == 0.0f; })) continue;
      features[i] = Embedding::normalize(std::span<const float>(row));
    }
  }

  std::map<int, Tracklet> by_id;
  std::vector<std::size_t> order(parsed.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return parsed[a].frame < parsed[b].frame;
  });
  for (std::size_t i : order) {
    Tracklet& t = by_id[parsed[i].id];
    t.id = parsed[i].id;
    t.records.push_back(parsed[i].record);
    if (features[i]) t.embeddings.push_back(FramedEmbedding{parsed[i].frame, *features[i]});
  }
  TrackSet out;
  for (auto& [id, t] : by_id) out.tracklets.push_back(std::move(t));
  if (out.tracklets.empty()) warn(path.string() + ": no tracks");
  return out;
}

GroundTruth parse_ground_truth(std::istream& in, const std::string& source) {
  LineReader reader(in, source);
  GroundTruth gt;
  std::set<std::pair<int, int>> seen;
  Line line;
  while (reader.next(line)) {
    if (line.fields.size() < 6) reader.fail(line, "expected at least 6 comma-separated fields");
    LabeledBox b;
    b.frame = reader.integer(line, 0, "frame");
    if (b.frame < 1) reader.fail(line, "frame must be >= 1");
    b.id = reader.integer(line, 1, "id");
    if (b.id < 1) reader.fail(line, "ground-truth id must be >= 1");
    b.box = read_box(reader, line);
    if (!seen.emplace(b.frame, b.id).second) reader.fail(line, "duplicate (frame, id)");
    gt.boxes.push_back(b);
  }
  if (gt.boxes.empty()) warn(source + ": no ground-truth boxes");
  std::stable_sort(gt.boxes.begin(), gt.boxes.end(), [](const LabeledBox& a, const LabeledBox& b) {
    return a.frame != b.frame ? a.frame < b.frame : a.id < b.id;
  });
  return gt;
}

GroundTruth read_ground_truth(const std::filesystem::path& path) {
  auto in = open_text(path);
  return parse_ground_truth(in, path.string());
}

void write_ground_truth(const GroundTruth& gt, const std::filesystem::path& path) {
  std::vector<LabeledBox> boxes = gt.boxes;
  std::sort(boxes.begin(), boxes.end(), [](const LabeledBox& a, const LabeledBox& b) {
    return a.frame != b.frame ? a.frame < b.frame : a.id < b.id;
  });
  std::string out;
  for (const auto& b : boxes) {
    out += std::to_string(b.frame) + "," + std::to_string(b.id) + "," + fixed6(b.box.x) + "," +
           fixed6(b.box.y) + "," + fixed6(b.box.w) + "," + fixed6(b.box.h) + ",1,1,1\n";
  }
  auto f = create_text(path);
  f << out;
  if (!f) throw Error(ErrorKind::Io, "failed writing " + path.string());
}

// ---------------------------------------------------------------------------
// Run configuration

namespace {

using nlohmann::json;

// Reads known keys out of one JSON object and rejects leftovers.
class Section {
 public:
  Section(const json& doc, std::string name) : name_(std::move(name)) {
    if (doc.contains(name_)) {
      obj_ = &doc.at(name_);
      if (!obj_->is_object()) fail(name_ + " must be an object");
    }
  }

  template <typename T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    if (obj_ == nullptr || !obj_->contains(key)) return;
    const json& v = obj_->at(key);
    try {
      if constexpr (std::is_same_v<T, bool>) {
        if (!v.is_boolean()) throw std::invalid_argument("expected a boolean");
      } else if constexpr (std::is_integral_v<T>) {
        if (!v.is_number_integer()) throw std::invalid_argument("expected an integer");
        if constexpr (std::is_unsigned_v<T>) {
          if (v.is_number_integer() && !v.is_number_unsigned()) {
            throw std::invalid_argument("expected a non-negative integer");
          }
        }
      } else if constexpr (std::is_floating_point_v<T>) {
        if (!v.is_number()) throw std::invalid_argument("expected a number");
      }
      out = v.get<T>();
    } catch (const std::exception& e) {
      fail(name_ + "." + key + ": " + e.what());
    }
  }

  void get_reals(const char* key, std::vector<double>& out) {
    seen_.insert(key);
    if (obj_ == nullptr || !obj_->contains(key)) return;
    const json& v = obj_->at(key);
    if (!v.is_array()) fail(name_ + "." + key + ": expected an array of numbers");
    std::vector<double> vals;
    for (const auto& x : v) {
      if (!x.is_number()) fail(name_ + "." + key + ": expected an array of numbers");
      vals.push_back(x.get<double>());
    }
    out = std::move(vals);
  }

  void get_optional_count(const char* key, std::optional<std::size_t>& out) {
    seen_.insert(key);
    if (obj_ == nullptr || !obj_->contains(key)) return;
    const json& v = obj_->at(key);
    if (v.is_null()) {
      out.reset();
      return;
    }
    if (!v.is_number_unsigned()) fail(name_ + "." + key + ": expected a non-negative integer or null");
    out = v.get<std::size_t>();
  }

  void get_pairs(const char* key, std::vector<std::pair<int, int>>& out) {
    seen_.insert(key);
    if (obj_ == nullptr || !obj_->contains(key)) return;
    const json& v = obj_->at(key);
    const std::string msg = name_ + "." + key + ": expected an array of [int, int] pairs";
    if (!v.is_array()) fail(msg);
    std::vector<std::pair<int, int>> vals;
    for (const auto& x : v) {
      if (!x.is_array() || x.size() != 2 || !x[0].is_number_integer() ||
          !x[1].is_number_integer()) {
        fail(msg);
      }
      vals.emplace_back(x[0].get<int>(), x[1].get<int>());
    }
    out = std::move(vals);
  }

  void finish() const {
    if (obj_ == nullptr) return;
    for (const auto& [key, value] : obj_->items()) {
      if (!seen_.count(key)) fail("unknown key '" + name_ + "." + key + "'");
    }
  }

 private:
  [[noreturn]] static void fail(const std::string& msg) { throw Error(ErrorKind::Config, msg); }

  std::string name_;
  const json* obj_ = nullptr;
  std::set<std::string> seen_;
};

}  // namespace

RunConfig parse_config(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::Config, std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw Error(ErrorKind::Config, "config must be a JSON object");
  static const std::set<std::string> kSections{"tracker", "appearance", "refine", "metrics",
                                               "scenario"};
  for (const auto& [key, value] : doc.items()) {
    if (!kSections.count(key)) throw Error(ErrorKind::Config, "unknown key '" + key + "'");
  }

  RunConfig c;
  {
    Section s(doc, "tracker");
    auto& t = c.tracker;
    s.get("conf_high", t.conf_high);
    s.get("conf_low", t.conf_low);
    s.get("proximity_threshold", t.proximity_threshold);
    s.get("lambda", t.lambda);
    s.get_reals("expansion_schedule", t.expansion_schedule);
    s.get("n_init", t.n_init);
    s.get("max_age", t.max_age);
    s.get("appearance_reject", t.appearance_reject);
    s.finish();
  }
  {
    Section s(doc, "appearance");
    s.get("use_ema", c.tracker.use_ema);
    s.get("momentum", c.tracker.momentum);
    s.get("max_history", c.tracker.max_history);
    s.finish();
  }
  {
    Section s(doc, "refine");
    auto& r = c.refine;
    s.get("eps", r.eps);
    s.get("min_samples", r.min_samples);
    s.get("merge_threshold", r.merge_threshold);
    s.get("max_temporal_overlap", r.max_temporal_overlap);
    s.get_optional_count("target_count", r.target_count);
    s.get("enable_split", r.enable_split);
    s.get("max_speed", r.max_speed);
    s.get("max_history", r.max_history);
    s.finish();
  }
  {
    Section s(doc, "metrics");
    s.get_reals("alpha_grid", c.metrics.alpha_grid);
    s.get("clear_threshold", c.metrics.clear_threshold);
    s.finish();
  }
  {
    Section s(doc, "scenario");
    auto& g = c.scenario;
    s.get("num_ids", g.num_ids);
    s.get("frames", g.frames);
    s.get("field_width", g.field_width);
    s.get("field_height", g.field_height);
    s.get("embed_dim", g.embed_dim);
    s.get("speed_min", g.motion.speed_min);
    s.get("speed_max", g.motion.speed_max);
    s.get("turn_probability", g.motion.turn_probability);
    s.get("width_min", g.size.width_min);
    s.get("width_max", g.size.width_max);
    s.get("aspect_min", g.size.aspect_min);
    s.get("aspect_max", g.size.aspect_max);
    s.get("scale_drift", g.size.scale_drift);
    s.get("p_miss", g.detector.p_miss);
    s.get("clutter_rate", g.detector.clutter_rate);
    s.get("jitter_sigma", g.detector.jitter_sigma);
    s.get("conf_sigma", g.detector.conf_sigma);
    s.get("embedding_sigma", g.embedding_sigma);
    s.get("occlusion_threshold", g.occlusion.threshold);
    s.get("p_drop", g.occlusion.p_drop);
    s.get_pairs("confusable_pairs", g.confusable_pairs);
    s.get("seed", g.seed);
    s.finish();
  }
  validate(c.tracker);
  validate(c.refine);
  validate(c.metrics);
  validate(c.scenario);
  return c;
}

RunConfig read_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace trackforge
