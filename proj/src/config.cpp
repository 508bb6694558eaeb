#include "wmfcc/config.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace wmfcc {

using nlohmann::json;

namespace {

// Reads optional members of a JSON object into existing defaults and
// rejects keys it does not know.
class Reader {
 public:
  Reader(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) fail(ErrorCode::BadConfig, where_ + " must be an object");
  }

  template <typename T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception& e) {
      fail(ErrorCode::BadConfig, where_ + "." + key + ": " + e.what());
    }
  }

  const json* child(const char* key) {
    seen_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }

  void finish() const {
    for (const auto& [key, value] : j_.items())
      if (!seen_.count(key)) fail(ErrorCode::BadConfig, "unknown key " + where_ + "." + key);
  }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

json mfcc_json(const MfccConfig& c) {
  return {{"frame_len", c.frame_len},
          {"overlap", c.overlap},
          {"n_fft", c.n_fft},
          {"n_filters", c.n_filters},
          {"n_ceps", c.n_ceps},
          {"fmin_hz", c.fmin_hz},
          {"fmax_hz", c.fmax_hz ? json(*c.fmax_hz) : json(nullptr)},
          {"window", std::string(to_string(c.window))},
          {"log_floor", c.log_floor},
          {"pre_emphasis", c.pre_emphasis},
          {"delta_order", c.delta_order}};
}

MfccConfig mfcc_from(const json& j, const std::string& where) {
  MfccConfig c;
  Reader r(j, where);
  r.get("frame_len", c.frame_len);
  r.get("overlap", c.overlap);
  r.get("n_fft", c.n_fft);
  r.get("n_filters", c.n_filters);
  r.get("n_ceps", c.n_ceps);
  r.get("fmin_hz", c.fmin_hz);
  if (const json* f = r.child("fmax_hz"); f && !f->is_null()) {
    if (!f->is_number()) fail(ErrorCode::BadConfig, where + ".fmax_hz must be a number or null");
    c.fmax_hz = f->get<double>();
  }
  std::string window(to_string(c.window));
  r.get("window", window);
  c.window = parse_window(window);
  r.get("log_floor", c.log_floor);
  r.get("pre_emphasis", c.pre_emphasis);
  r.get("delta_order", c.delta_order);
  r.finish();
  return c;
}

}  // namespace

void PipelineConfig::validate() const {
  mfcc.validate(corpus.sample_rate_hz);
  hybrid.validate();
  hybrid.mfcc.validate(channel_sample_rate(corpus.sample_rate_hz, hybrid.channels.front()));
  if (hmm.n_states < 1 || hmm.n_mix < 1) fail(ErrorCode::BadConfig, "hmm needs n_states, n_mix >= 1");
  if (hmm.max_jump < 1 && hmm.max_jump != kErgodic)
    fail(ErrorCode::BadConfig, "hmm.max_jump must be >= 1 or -1 (ergodic)");
  if (!(hmm.self_loop > 0 && hmm.self_loop < 1)) fail(ErrorCode::BadConfig, "hmm.self_loop must be in (0, 1)");
  if (hmm.max_iters < 0) fail(ErrorCode::BadConfig, "hmm.max_iters must be >= 0");
  if (!(hmm.variance_floor_min > 0)) fail(ErrorCode::BadConfig, "hmm.variance_floor_min must be positive");
  if (corpus.n_speakers < 2 || corpus.n_utts < 2 || corpus.n_train < 1 ||
      corpus.n_train >= corpus.n_utts)
    fail(ErrorCode::BadConfig, "corpus needs >= 2 speakers and 1 <= n_train < n_utts");
  if (corpus.sample_rate_hz <= 0) fail(ErrorCode::BadConfig, "corpus.sample_rate_hz must be positive");
}

json to_json(const PipelineConfig& c) {
  json channels = json::array();
  for (const auto& ch : c.hybrid.channels) channels.push_back(ch.name());
  return {
      {"version", 1},
      {"mfcc", mfcc_json(c.mfcc)},
      {"wavelet_mfcc",
       {{"wavelet", "db8"},
        {"dwt_level", c.hybrid.dwt_level},
        {"channels", channels},
        {"source", std::string(to_string(c.hybrid.source))},
        {"extension", c.hybrid.extension == Extension::Symmetric ? "symmetric" : "periodization"},
        {"mfcc", mfcc_json(c.hybrid.mfcc)}}},
      {"hmm",
       {{"n_states", c.hmm.n_states},
        {"n_mix", c.hmm.n_mix},
        {"max_jump", c.hmm.max_jump},
        {"self_loop", c.hmm.self_loop},
        {"max_iters", c.hmm.max_iters},
        {"tol", c.hmm.tol},
        {"variance_floor_ratio", c.hmm.variance_floor_ratio},
        {"variance_floor_min", c.hmm.variance_floor_min},
        {"termination", std::string(to_string(c.hmm.termination))},
        {"kmeans_iters", c.hmm.kmeans_iters}}},
      {"dtw", {{"normalize_by_path_length", c.dtw.normalize_by_path_length}}},
      {"noise", {{"snr_db", c.noise.snr_db}}},
      {"corpus",
       {{"n_speakers", c.corpus.n_speakers},
        {"n_utts", c.corpus.n_utts},
        {"n_train", c.corpus.n_train},
        {"sample_rate_hz", c.corpus.sample_rate_hz}}},
      {"seed", c.seed},
  };
}

PipelineConfig config_from_json(const json& j) {
  PipelineConfig c;
  Reader top(j, "config");
  int version = 1;
  top.get("version", version);
  if (version != 1) fail(ErrorCode::BadConfig, "unsupported config version " + std::to_string(version));
  if (const json* m = top.child("mfcc")) c.mfcc = mfcc_from(*m, "mfcc");
  if (const json* w = top.child("wavelet_mfcc")) {
    Reader r(*w, "wavelet_mfcc");
    std::string wavelet = "db8";
    r.get("wavelet", wavelet);
    if (wavelet != "db8") fail(ErrorCode::BadConfig, "only the db8 wavelet is available");
    r.get("dwt_level", c.hybrid.dwt_level);
    c.hybrid.channels = standard_channels(c.hybrid.dwt_level);
    if (const json* chs = r.child("channels")) {
      if (!chs->is_array()) fail(ErrorCode::BadConfig, "wavelet_mfcc.channels must be an array");
      c.hybrid.channels.clear();
      for (const auto& ch : *chs) c.hybrid.channels.push_back(WaveletChannel::parse(ch.get<std::string>()));
    }
    std::string source(to_string(c.hybrid.source));
    r.get("source", source);
    c.hybrid.source = parse_channel_source(source);
    std::string extension = "symmetric";
    r.get("extension", extension);
    if (extension == "symmetric")
      c.hybrid.extension = Extension::Symmetric;
    else if (extension == "periodization")
      c.hybrid.extension = Extension::Periodization;
    else
      fail(ErrorCode::BadConfig, "unknown extension '" + extension + "'");
    if (const json* m = r.child("mfcc")) c.hybrid.mfcc = mfcc_from(*m, "wavelet_mfcc.mfcc");
    r.finish();
  }
  if (const json* h = top.child("hmm")) {
    Reader r(*h, "hmm");
    r.get("n_states", c.hmm.n_states);
    r.get("n_mix", c.hmm.n_mix);
    r.get("max_jump", c.hmm.max_jump);
    r.get("self_loop", c.hmm.self_loop);
    r.get("max_iters", c.hmm.max_iters);
    r.get("tol", c.hmm.tol);
    r.get("variance_floor_ratio", c.hmm.variance_floor_ratio);
    r.get("variance_floor_min", c.hmm.variance_floor_min);
    std::string termination(to_string(c.hmm.termination));
    r.get("termination", termination);
    c.hmm.termination = parse_termination(termination);
    r.get("kmeans_iters", c.hmm.kmeans_iters);
    r.finish();
  }
  if (const json* d = top.child("dtw")) {
    Reader r(*d, "dtw");
    r.get("normalize_by_path_length", c.dtw.normalize_by_path_length);
    r.finish();
  }
  if (const json* n = top.child("noise")) {
    Reader r(*n, "noise");
    r.get("snr_db", c.noise.snr_db);
    r.finish();
  }
  if (const json* k = top.child("corpus")) {
    Reader r(*k, "corpus");
    r.get("n_speakers", c.corpus.n_speakers);
    r.get("n_utts", c.corpus.n_utts);
    r.get("n_train", c.corpus.n_train);
    r.get("sample_rate_hz", c.corpus.sample_rate_hz);
    r.finish();
  }
  top.get("seed", c.seed);
  top.finish();
  c.validate();
  return c;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open config " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    fail(ErrorCode::BadConfig, path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

void save_config(const std::filesystem::path& path, const PipelineConfig& config) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::Io, "cannot write " + path.string());
  out << to_json(config).dump(2) << '\n';
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string config_hash(const PipelineConfig& config) { return fnv1a_hex(to_json(config).dump()); }

FeatureSequence extract_features(const AudioClip& clip, FeatureKind kind,
                                 const PipelineConfig& config) {
  FeatureSequence seq = kind == FeatureKind::Mfcc ? extract_mfcc(clip, config.mfcc)
                                                  : extract_wavelet_mfcc(clip, config.hybrid);
  seq.config_hash = config_hash(config);
  return seq;
}

}  // namespace wmfcc
