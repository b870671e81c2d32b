#include "hdm/harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace hdm {

const SampledSignal& Recording::channel(const std::string& name) const {
  for (std::size_t i = 0; i < channel_names.size(); ++i)
    if (channel_names[i] == name) return channels[i];
  throw std::invalid_argument("Recording: missing channel " + name);
}

Recording Recording::select(const std::vector<std::string>& names) const {
  if (names.empty()) return *this;
  Recording out;
  out.markers = markers;
  out.subject = subject;
  for (const auto& n : names) {
    out.channel_names.push_back(n);
    out.channels.push_back(channel(n));
  }
  return out;
}

namespace {
std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

double parse_double(const std::string& s, const std::string& file, std::size_t line_no) {
  try {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ParseError(file + ":" + std::to_string(line_no) + ": bad numeric field '" + s + "'");
  }
}
}  // namespace

Recording load_recording(const std::string& signal_path, const std::string& marker_path,
                         const std::string& subject) {
  Recording rec;
  rec.subject = subject;

  std::ifstream sf(signal_path);
  if (!sf) throw ParseError(signal_path + ": cannot open");
  std::string line;
  if (!std::getline(sf, line)) throw ParseError(signal_path + ":1: empty file");
  auto header = split_csv_line(line);
  if (header.size() < 2 || header[0] != "time")
    throw ParseError(signal_path + ":1: header must be 'time,<name>,...'");
  rec.channel_names.assign(header.begin() + 1, header.end());
  rec.channels.resize(rec.channel_names.size());

  std::vector<double> times;
  std::size_t line_no = 1;
  while (std::getline(sf, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    if (fields.size() != header.size())
      throw ParseError(signal_path + ":" + std::to_string(line_no) + ": expected " +
                       std::to_string(header.size()) + " fields, got " + std::to_string(fields.size()));
    times.push_back(parse_double(fields[0], signal_path, line_no));
    for (std::size_t c = 0; c < rec.channels.size(); ++c)
      rec.channels[c].samples.push_back(parse_double(fields[c + 1], signal_path, line_no));
  }
  if (times.size() < 2) throw ParseError(signal_path + ": need at least 2 samples");
  double t_h = times[1] - times[0];
  if (!(t_h > 0.0)) throw ParseError(signal_path + ": non-increasing time column");
  for (std::size_t i = 1; i < times.size(); ++i)
    if (std::abs(times[i] - times[i - 1] - t_h) > 1e-6)
      throw ParseError(signal_path + ":" + std::to_string(i + 2) + ": non-uniform sampling");
  for (auto& ch : rec.channels) {
    ch.t_h = t_h;
    ch.t0 = times[0];
  }

  if (marker_path.empty()) return rec;  // signal-only load
  std::ifstream mf(marker_path);
  if (!mf) throw ParseError(marker_path + ": cannot open");
  if (!std::getline(mf, line)) throw ParseError(marker_path + ":1: empty file");
  if (line != "onset_s,duration_s,label")
    throw ParseError(marker_path + ":1: header must be 'onset_s,duration_s,label'");
  line_no = 1;
  while (std::getline(mf, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    if (fields.size() != 3)
      throw ParseError(marker_path + ":" + std::to_string(line_no) + ": expected 3 fields");
    LabeledEvent e;
    e.onset = parse_double(fields[0], marker_path, line_no);
    e.duration = parse_double(fields[1], marker_path, line_no);
    try {
      e.label = label_from_name(fields[2]);
    } catch (const std::exception& ex) {
      throw ParseError(marker_path + ":" + std::to_string(line_no) + ": " + ex.what());
    }
    rec.markers.push_back(e);
  }
  // Overlap check (same rule align_labels enforces).
  std::vector<LabeledEvent> sorted = rec.markers;
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const LabeledEvent& a, const LabeledEvent& b) { return a.onset < b.onset; });
  double prev_end = -1e300;
  for (const auto& e : sorted) {
    if (e.onset < prev_end - 1e-9) throw ParseError(marker_path + ": overlapping marker events");
    prev_end = e.onset + e.duration;
  }
  return rec;
}

void save_recording(const Recording& rec, const std::string& signal_path, const std::string& marker_path) {
  std::ofstream sf(signal_path);
  if (!sf) throw std::runtime_error("cannot write " + signal_path);
  sf.precision(17);
  sf << "time";
  for (const auto& n : rec.channel_names) sf << "," << n;
  sf << "\n";
  std::size_t n = rec.n_samples();
  for (std::size_t i = 0; i < n; ++i) {
    sf << rec.channels.front().time_at(i);
    for (const auto& ch : rec.channels) sf << "," << ch.samples[i];
    sf << "\n";
  }

  std::ofstream mf(marker_path);
  if (!mf) throw std::runtime_error("cannot write " + marker_path);
  mf.precision(17);
  mf << "onset_s,duration_s,label\n";
  for (const auto& e : rec.markers)
    mf << e.onset << "," << e.duration << "," << label_name(e.label) << "\n";
}

FeatureScheme scheme_from_name(const std::string& s) {
  if (s == "raw") return FeatureScheme::Raw;
  if (s == "tfd") return FeatureScheme::Tfd;
  if (s == "hdm") return FeatureScheme::Hdm;
  throw std::invalid_argument("unknown feature scheme: " + s);
}

std::string scheme_name(FeatureScheme s) {
  switch (s) {
    case FeatureScheme::Raw: return "raw";
    case FeatureScheme::Tfd: return "tfd";
    case FeatureScheme::Hdm: return "hdm";
  }
  throw std::invalid_argument("bad scheme");
}

SwttResult swtt_evaluate(const FeatureMatrix& features, const WindowSpec& wspec, const ModelSpec& mspec,
                         const SwttConfig& cfg) {
  wspec.validate();
  if (features.labels.size() != features.rows.size())
    throw std::invalid_argument("swtt_evaluate: features must carry labels");
  std::size_t hist = wspec.history_samples();
  std::size_t hor = static_cast<std::size_t>(std::llround(wspec.horizon * wspec.fs));
  std::size_t step = wspec.step_samples();
  std::size_t gap_rows = (hist + hor + step - 1) / step;

  std::size_t first_test = cfg.min_train_rows + gap_rows - 1;
  if (features.rows.size() <= first_test)
    throw std::invalid_argument("swtt_evaluate: insufficient data; need more than " +
                                std::to_string(first_test) + " feature rows, have " +
                                std::to_string(features.rows.size()));

  SwttResult res;
  res.first_test_row = first_test;
  std::vector<Label> actual, predicted;
  for (std::size_t j = first_test; j < features.rows.size(); ++j) {
    std::size_t train_end = j + 1 - gap_rows;  // rows [train_begin, train_end) are leak-free
    std::size_t train_begin = 0;
    if (cfg.trailing_rows > 0 && train_end > cfg.trailing_rows) train_begin = train_end - cfg.trailing_rows;
    // Leakage guard: every training row's horizon must end before the test
    // row's history starts.
    for (std::size_t i = train_begin; i < train_end; ++i) {
      if (wspec.window_start(i) + hist + hor > wspec.window_start(j))
        throw std::logic_error("swtt_evaluate: temporal leakage detected");
    }
    FeatureMatrix train_set;
    train_set.columns = features.columns;
    train_set.rows.assign(features.rows.begin() + static_cast<std::ptrdiff_t>(train_begin),
                          features.rows.begin() + static_cast<std::ptrdiff_t>(train_end));
    train_set.labels.assign(features.labels.begin() + static_cast<std::ptrdiff_t>(train_begin),
                            features.labels.begin() + static_cast<std::ptrdiff_t>(train_end));
    Label pred;
    try {
      auto model = train(mspec, train_set);
      pred = model->predict_row(features.rows[j]);
    } catch (const std::invalid_argument&) {
      // Single-class warm-up window: predict that class.
      pred = train_set.labels.front();
    }
    actual.push_back(features.labels[j]);
    predicted.push_back(pred);
    res.fold_accuracy.push_back(pred == features.labels[j] ? 1.0 : 0.0);
  }
  res.cm = confusion(actual, predicted);
  res.test_rows = actual.size();
  return res;
}

FeatureMatrix extract_features(const Recording& rec, FeatureScheme scheme, const WindowSpec& wspec,
                               const DecomposerConfig& dconfig, const HdmFeatureSpec& hspec) {
  switch (scheme) {
    case FeatureScheme::Raw:
      return window_raw(rec.channels, wspec, rec.channel_names);
    case FeatureScheme::Tfd: {
      auto bank = default_bank(wspec.fs);
      return window_tfd(rec.channels, wspec, bank, rec.channel_names);
    }
    case FeatureScheme::Hdm: {
      std::vector<Decomposition> decomps;
      decomps.reserve(rec.channels.size());
      BaseKernel base;
      for (const auto& ch : rec.channels) decomps.push_back(decompose(ch, dconfig, base));
      return window_hdm(decomps, wspec, hspec, rec.n_samples(), rec.channel_names);
    }
  }
  throw std::invalid_argument("extract_features: bad scheme");
}

namespace {
std::string model_display_name(const ModelSpec& m) {
  switch (m.kind) {
    case ModelKind::Lda: return "lda";
    case ModelKind::Cart: return "cart-" + std::to_string(m.cart_depth);
    case ModelKind::RandomForest: return "rf-" + std::to_string(m.rf_trees);
    case ModelKind::LinearSvm: return "svm-l";
  }
  return "?";
}
}  // namespace

ScenarioReport run_scenario(const std::vector<Recording>& recordings, const ScenarioConfig& config) {
  if (recordings.empty()) throw std::invalid_argument("run_scenario: no recordings");
  if (config.models.empty()) throw std::invalid_argument("run_scenario: no models");
  ScenarioReport report;
  for (const auto& full_rec : recordings) {
    Recording rec = full_rec.select(config.channel_subset);
    std::vector<Label> labels = align_labels(rec.markers, config.window, rec.n_samples());
    for (FeatureScheme scheme : config.schemes) {
      FeatureMatrix features = extract_features(rec, scheme, config.window, config.decomposer, config.hdm_features);
      attach_labels(features, labels);
      for (const ModelSpec& mspec : config.models) {
        ModelSpec seeded = mspec;
        seeded.seed = seeded.seed ^ config.seed;
        SwttResult r = swtt_evaluate(features, config.window, seeded, config.swtt);
        ScenarioCell cell;
        cell.subject = rec.subject;
        cell.scheme = scheme;
        cell.model_name = model_display_name(mspec);
        cell.cm = r.cm;
        cell.report = metrics(r.cm);
        cell.fold_accuracy = std::move(r.fold_accuracy);
        report.cells.push_back(std::move(cell));
      }
    }
  }
  return report;
}

}  // namespace hdm
