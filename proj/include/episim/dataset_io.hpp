#pragma once

#include <algorithm>
#include <bit>
#include <chrono>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "episim/scenario.hpp"
#include "episim/series.hpp"

namespace episim {

namespace fs = std::filesystem;

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One generated scenario: its full configuration plus named daily or
/// weekly count channels.
struct ScenarioRecord {
  ScenarioConfig config;
  Resolution resolution = Resolution::Daily;
  std::vector<std::pair<std::string, std::vector<Count>>> channels;

  const std::vector<Count>* channel(std::string_view name) const {
    for (const auto& [n, v] : channels)
      if (n == name) return &v;
    return nullptr;
  }

  ObservedSeries observed(std::string_view prefix = "observed_") const {
    ObservedSeries s;
    s.resolution = resolution;
    s.population = config.population;
    for (const auto& [n, v] : channels) {
      if (!n.starts_with(prefix)) continue;
      s.channels.push_back({n.substr(prefix.size()), std::vector<double>(v.begin(), v.end())});
    }
    return s;
  }

  bool operator==(const ScenarioRecord&) const = default;
};

// Binary layout, all integers little-endian:
//   magic "EPSR" | u32 version | u64 config_len | config text (key = value lines)
//   | u8 resolution | u32 channel_count
//   | per channel: u16 name_len | name | u64 length | length x i64
inline constexpr char kRecordMagic[4] = {'E', 'P', 'S', 'R'};
inline constexpr std::uint32_t kRecordVersion = 1;

namespace detail {

static_assert(std::endian::native == std::endian::little, "record codec assumes little-endian host");

template <typename T>
void put(std::string& buf, T v) {
  char bytes[sizeof(T)];
  std::memcpy(bytes, &v, sizeof(T));
  buf.append(bytes, sizeof(T));
}

class Reader {
 public:
  explicit Reader(std::string_view data) : data_(data) {}

  template <typename T>
  T get(std::string_view field) {
    need(sizeof(T), field);
    T v;
    std::memcpy(&v, data_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }

  std::string_view bytes(std::size_t n, std::string_view field) {
    need(n, field);
    auto out = data_.substr(pos_, n);
    pos_ += n;
    return out;
  }

  bool done() const { return pos_ == data_.size(); }
  std::size_t remaining() const { return data_.size() - pos_; }

 private:
  void need(std::size_t n, std::string_view field) const {
    if (data_.size() - pos_ < n)
      throw FormatError("record truncated while reading '" + std::string(field) + "' (need " +
                        std::to_string(n) + " bytes, have " + std::to_string(data_.size() - pos_) + ")");
  }
  std::string_view data_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline std::string encode_record(const ScenarioRecord& rec) {
  std::string buf;
  buf.append(kRecordMagic, 4);
  detail::put<std::uint32_t>(buf, kRecordVersion);
  const std::string cfg = serialize_config(rec.config);
  detail::put<std::uint64_t>(buf, cfg.size());
  buf += cfg;
  detail::put<std::uint8_t>(buf, static_cast<std::uint8_t>(rec.resolution));
  detail::put<std::uint32_t>(buf, static_cast<std::uint32_t>(rec.channels.size()));
  for (const auto& [name, values] : rec.channels) {
    detail::put<std::uint16_t>(buf, static_cast<std::uint16_t>(name.size()));
    buf += name;
    detail::put<std::uint64_t>(buf, values.size());
    for (Count v : values) detail::put<std::int64_t>(buf, v);
  }
  return buf;
}

inline ScenarioRecord decode_record(std::string_view data) {
  detail::Reader in(data);
  if (in.bytes(4, "magic") != std::string_view(kRecordMagic, 4)) throw FormatError("bad magic: not a scenario record");
  const auto version = in.get<std::uint32_t>("version");
  if (version != kRecordVersion) throw FormatError("unsupported record version " + std::to_string(version));
  ScenarioRecord rec;
  const auto cfg_len = in.get<std::uint64_t>("config_len");
  if (cfg_len > in.remaining()) throw FormatError("field 'config_len' exceeds record size");
  try {
    rec.config = parse_config(in.bytes(cfg_len, "config"));
  } catch (const ConfigParseError& e) {
    throw FormatError(std::string("config block: ") + e.what());
  }
  const auto res = in.get<std::uint8_t>("resolution");
  if (res > 2) throw FormatError("field 'resolution' out of range");
  rec.resolution = static_cast<Resolution>(res);
  const auto n_channels = in.get<std::uint32_t>("channel_count");
  for (std::uint32_t c = 0; c < n_channels; ++c) {
    const auto name_len = in.get<std::uint16_t>("channel_name_len");
    std::string name(in.bytes(name_len, "channel_name"));
    const auto len = in.get<std::uint64_t>("channel '" + name + "' length");
    if (len > in.remaining() / sizeof(std::int64_t))
      throw FormatError("field 'channel \"" + name + "\" length' = " + std::to_string(len) +
                        " exceeds remaining record bytes");
    std::vector<Count> values(len);
    for (auto& v : values) v = in.get<std::int64_t>("channel '" + name + "' values");
    rec.channels.emplace_back(std::move(name), std::move(values));
  }
  if (!in.done()) throw FormatError("trailing bytes after last channel");
  return rec;
}

inline std::string read_file(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << f.rdbuf();
  if (f.bad()) throw IoError("read failure on '" + path.string() + "'");
  return ss.str();
}

inline void write_file(const fs::path& path, std::string_view bytes) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open '" + path.string() + "' for writing");
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  f.close();
  if (!f) throw IoError("write failure on '" + path.string() + "'");
}

/// Writes the record and returns its path (the record locator).
inline fs::path write_scenario(const ScenarioRecord& rec, const fs::path& path) {
  write_file(path, encode_record(rec));
  return path;
}

inline ScenarioRecord read_scenario(const fs::path& path) {
  try {
    return decode_record(read_file(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Manifest

struct ManifestEntry {
  std::uint64_t index = 0;
  Mode mode = Mode::HumanToHuman;
  std::uint64_t stream = 0;
  std::string file;  // relative to the manifest directory
  Count population = 0;
  Count total_true_cases = 0;
  Count total_observed_cases = 0;
  long peak_index = 0;
  bool operator==(const ManifestEntry&) const = default;
};

struct DatasetManifest {
  std::uint32_t format_version = kRecordVersion;
  std::string corpus_id;
  std::uint64_t master_seed = 0;
  long days = 0;
  Resolution resolution = Resolution::Daily;
  std::vector<ManifestEntry> entries;
  bool operator==(const DatasetManifest&) const = default;
};

inline constexpr std::string_view kManifestName = "manifest.txt";

inline ManifestEntry summarize(const ScenarioRecord& rec, std::uint64_t index, std::string file) {
  ManifestEntry e;
  e.index = index;
  e.mode = rec.config.mode;
  e.stream = rec.config.stream;
  e.file = std::move(file);
  e.population = rec.config.population;
  if (const auto* t = rec.channel("true_cases"))
    for (Count v : *t) e.total_true_cases += v;
  if (const auto* o = rec.channel("observed_cases")) {
    for (Count v : *o) e.total_observed_cases += v;
    e.peak_index = static_cast<long>(std::max_element(o->begin(), o->end()) - o->begin());
  }
  return e;
}

inline std::string format_manifest(const DatasetManifest& m) {
  std::ostringstream out;
  out << "# episim scenario manifest\n";
  out << "format_version = " << m.format_version << '\n';
  out << "corpus_id = " << m.corpus_id << '\n';
  out << "master_seed = " << m.master_seed << '\n';
  out << "days = " << m.days << '\n';
  out << "resolution = " << to_string(m.resolution) << '\n';
  out << "scenarios = " << m.entries.size() << '\n';
  out << "index\tmode\tstream\tfile\tpopulation\ttotal_true_cases\ttotal_observed_cases\tpeak_index\n";
  for (const auto& e : m.entries) {
    out << e.index << '\t' << to_string(e.mode) << '\t' << e.stream << '\t' << e.file << '\t'
        << e.population << '\t' << e.total_true_cases << '\t' << e.total_observed_cases << '\t'
        << e.peak_index << '\n';
  }
  return out.str();
}

inline DatasetManifest parse_manifest(std::string_view text) {
  DatasetManifest m;
  std::size_t line_no = 0;
  bool in_table = false;
  std::optional<std::size_t> declared;
  for (auto line : detail::split(text, '\n')) {
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    const auto where = [&] { return "manifest line " + std::to_string(line_no) + ": "; };
    if (!in_table) {
      if (line.starts_with("index\t")) {
        in_table = true;
        continue;
      }
      const auto eq = line.find(" = ");
      if (eq == std::string_view::npos) throw FormatError(where() + "expected 'key = value'");
      const auto key = line.substr(0, eq);
      const auto val = line.substr(eq + 3);
      try {
        if (key == "format_version") m.format_version = detail::parse_number<std::uint32_t>(val, key);
        else if (key == "corpus_id") m.corpus_id = std::string(val);
        else if (key == "master_seed") m.master_seed = detail::parse_number<std::uint64_t>(val, key);
        else if (key == "days") m.days = detail::parse_number<long>(val, key);
        else if (key == "resolution") m.resolution = parse_resolution(val);
        else if (key == "scenarios") declared = detail::parse_number<std::size_t>(val, key);
      } catch (const std::exception& e) {
        throw FormatError(where() + e.what());
      }
      continue;
    }
    const auto cols = detail::split(line, '\t');
    if (cols.size() != 8) throw FormatError(where() + "expected 8 tab-separated columns");
    try {
      ManifestEntry e;
      e.index = detail::parse_number<std::uint64_t>(cols[0], "index");
      e.mode = parse_mode(cols[1]);
      e.stream = detail::parse_number<std::uint64_t>(cols[2], "stream");
      e.file = std::string(cols[3]);
      e.population = detail::parse_number<Count>(cols[4], "population");
      e.total_true_cases = detail::parse_number<Count>(cols[5], "total_true_cases");
      e.total_observed_cases = detail::parse_number<Count>(cols[6], "total_observed_cases");
      e.peak_index = detail::parse_number<long>(cols[7], "peak_index");
      m.entries.push_back(std::move(e));
    } catch (const std::exception& e) {
      throw FormatError(where() + e.what());
    }
  }
  if (declared && *declared != m.entries.size())
    throw FormatError("manifest declares " + std::to_string(*declared) + " scenarios but lists " +
                      std::to_string(m.entries.size()));
  for (std::size_t i = 0; i < m.entries.size(); ++i)
    if (m.entries[i].index != i) throw FormatError("manifest scenario indices are not dense at row " + std::to_string(i));
  return m;
}

inline void write_manifest(const DatasetManifest& m, const fs::path& dir) {
  write_file(dir / kManifestName, format_manifest(m));
}

/// Accepts either the manifest file or the corpus directory.
inline fs::path manifest_path(const fs::path& p) {
  return fs::is_directory(p) ? p / kManifestName : p;
}

inline DatasetManifest read_manifest(const fs::path& p) {
  return parse_manifest(read_file(manifest_path(p)));
}

inline std::string scenario_file_name(std::uint64_t index) {
  std::ostringstream s;
  s << "scenario_" << std::setw(6) << std::setfill('0') << index << ".bin";
  return s.str();
}

/// Rebuilds the manifest from the record files in `dir`.
inline DatasetManifest rebuild_manifest(const fs::path& dir, std::string corpus_id,
                                        std::uint64_t master_seed) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.path().extension() == ".bin") files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  DatasetManifest m;
  m.corpus_id = std::move(corpus_id);
  m.master_seed = master_seed;
  for (std::size_t i = 0; i < files.size(); ++i) {
    const auto rec = read_scenario(files[i]);
    m.days = rec.config.days;
    m.resolution = rec.resolution;
    m.entries.push_back(summarize(rec, i, files[i].filename().string()));
  }
  return m;
}

// ---------------------------------------------------------------------------
// CSV

/// Every channel of a record as `index,<channel>...` rows.
inline std::string export_csv(const ScenarioRecord& rec) {
  std::ostringstream out;
  out << (rec.resolution == Resolution::Daily ? "day" : "week");
  std::size_t n = 0;
  for (const auto& [name, v] : rec.channels) {
    out << ',' << name;
    n = std::max(n, v.size());
  }
  out << '\n';
  for (std::size_t t = 0; t < n; ++t) {
    out << t;
    for (const auto& ch : rec.channels) {
      out << ',';
      if (t < ch.second.size()) out << ch.second[t];
    }
    out << '\n';
  }
  return out.str();
}

struct CsvColumnMap {
  std::string date_column = "date";
  /// Source column -> channel name. Empty: every non-date column, same name.
  std::vector<std::pair<std::string, std::string>> value_columns;
  Count population = 0;
};

class CsvError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '"')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '"'))
    s.remove_suffix(1);
  return s;
}

inline std::optional<std::chrono::sys_days> parse_iso_date(std::string_view s) {
  int y = 0;
  unsigned mo = 0, d = 0;
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
  auto ok = [](std::string_view part, auto& out) {
    auto [p, ec] = std::from_chars(part.data(), part.data() + part.size(), out);
    return ec == std::errc() && p == part.data() + part.size();
  };
  if (!ok(s.substr(0, 4), y) || !ok(s.substr(5, 2), mo) || !ok(s.substr(8, 2), d)) return std::nullopt;
  const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{mo}, std::chrono::day{d}};
  if (!ymd.ok()) return std::nullopt;
  return std::chrono::sys_days{ymd};
}

}  // namespace detail

/// Reads `date,<value>...` rows (ISO dates). Rows are sorted by date, the
/// cadence (daily, weekly or monthly) is inferred from the smallest date
/// step, and cadence slots with no row or an empty/NA value are marked missing.
inline ObservedSeries import_csv(const fs::path& path, const CsvColumnMap& map = {}) {
  const std::string text = read_file(path);
  const auto lines = detail::split(text, '\n');
  if (lines.empty()) throw CsvError(path.string() + ": empty file");
  const auto header = detail::split(lines[0], ',');
  std::optional<std::size_t> date_col;
  std::vector<std::pair<std::size_t, std::string>> cols;
  for (std::size_t i = 0; i < header.size(); ++i) {
    const auto h = detail::trim(header[i]);
    if (h == map.date_column) {
      date_col = i;
      continue;
    }
    if (map.value_columns.empty()) {
      cols.emplace_back(i, std::string(h));
    } else {
      for (const auto& [src, dst] : map.value_columns)
        if (src == h) cols.emplace_back(i, dst);
    }
  }
  if (!date_col) throw CsvError(path.string() + ": no '" + map.date_column + "' column in header");
  if (cols.empty()) throw CsvError(path.string() + ": no value columns");

  struct Row {
    std::chrono::sys_days date;
    std::vector<std::optional<double>> values;
    std::size_t line;
  };
  std::vector<Row> rows;
  for (std::size_t ln = 1; ln < lines.size(); ++ln) {
    const auto line = detail::trim(lines[ln]);
    if (line.empty()) continue;
    const std::size_t line_no = ln + 1;
    const auto fields = detail::split(lines[ln], ',');
    const auto err = [&](const std::string& what) {
      return CsvError(path.string() + ": line " + std::to_string(line_no) + ": " + what);
    };
    if (fields.size() <= *date_col) throw err("missing date field");
    const auto date = detail::parse_iso_date(detail::trim(fields[*date_col]));
    if (!date) throw err("malformed date '" + std::string(detail::trim(fields[*date_col])) + "'");
    Row row{*date, {}, line_no};
    for (const auto& [idx, name] : cols) {
      const auto f = idx < fields.size() ? detail::trim(fields[idx]) : std::string_view{};
      if (f.empty() || f == "NA" || f == "na" || f == "NaN" || f == "nan") {
        row.values.emplace_back(std::nullopt);
        continue;
      }
      double v = 0.0;
      auto [p, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
      if (ec != std::errc() || p != f.data() + f.size()) throw err("malformed value '" + std::string(f) + "'");
      if (v < 0.0) throw err("negative count");
      row.values.emplace_back(v);
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw CsvError(path.string() + ": no data rows");
  std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.date < b.date; });
  for (std::size_t i = 1; i < rows.size(); ++i)
    if (rows[i].date == rows[i - 1].date)
      throw CsvError(path.string() + ": line " + std::to_string(rows[i].line) + ": duplicate date");

  using std::chrono::days;
  long min_step = 0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const long step = (rows[i].date - rows[i - 1].date).count();
    if (min_step == 0 || step < min_step) min_step = step;
  }
  ObservedSeries s;
  s.population = map.population;
  if (rows.size() == 1 || min_step == 1) s.resolution = Resolution::Daily;
  else if (min_step == 7) s.resolution = Resolution::Weekly;
  else if (min_step >= 28 && min_step <= 31) s.resolution = Resolution::Monthly;
  else throw CsvError(path.string() + ": unsupported cadence of " + std::to_string(min_step) + " days");

  const auto first = rows.front().date;
  const auto slot = [&](const Row& r) -> long {
    if (s.resolution == Resolution::Monthly) {
      const std::chrono::year_month_day a{first}, b{r.date};
      if (a.day() != b.day()) throw CsvError(path.string() + ": line " + std::to_string(r.line) + ": off-cadence date");
      return (static_cast<int>(b.year()) - static_cast<int>(a.year())) * 12 +
             (static_cast<int>(static_cast<unsigned>(b.month())) - static_cast<int>(static_cast<unsigned>(a.month())));
    }
    const long step = s.resolution == Resolution::Weekly ? 7 : 1;
    const long diff = (r.date - first).count();
    if (diff % step != 0) throw CsvError(path.string() + ": line " + std::to_string(r.line) + ": off-cadence date");
    return diff / step;
  };
  const long length = slot(rows.back()) + 1;
  s.missing.assign(static_cast<std::size_t>(length), true);
  for (const auto& [idx, name] : cols) s.channels.push_back({name, std::vector<double>(static_cast<std::size_t>(length), 0.0)});
  std::vector<bool> any_missing_value(static_cast<std::size_t>(length), false);
  for (const auto& r : rows) {
    const auto k = static_cast<std::size_t>(slot(r));
    s.missing[k] = false;
    for (std::size_t c = 0; c < cols.size(); ++c) {
      if (r.values[c]) s.channels[c].values[k] = *r.values[c];
      else any_missing_value[k] = true;
    }
  }
  for (std::size_t k = 0; k < s.missing.size(); ++k) s.missing[k] = s.missing[k] || any_missing_value[k];
  return s;
}

}  // namespace episim
