#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "semvid/codec.hpp"
#include "semvid/image_io.hpp"
#include "semvid/link.hpp"
#include "semvid/optim.hpp"

namespace fs = std::filesystem;
using namespace semvid;

namespace {

// Flat "name = value" config file.
std::map<std::string, std::string> load_config(const std::string& path) {
  std::map<std::string, std::string> cfg;
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  std::string line;
  while (std::getline(in, line)) {
    size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    size_t eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      size_t b = s.find_first_not_of(" \t\r");
      size_t e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (!key.empty()) cfg[key] = value;
  }
  return cfg;
}

struct Options {
  std::map<std::string, std::string> cfg;

  std::string get(const std::string& key, const std::string& fallback = "") const {
    auto it = cfg.find(key);
    return it == cfg.end() ? fallback : it->second;
  }
  double get_d(const std::string& key, double fallback) const {
    auto it = cfg.find(key);
    return it == cfg.end() ? fallback : std::stod(it->second);
  }
  int get_i(const std::string& key, int fallback) const {
    auto it = cfg.find(key);
    return it == cfg.end() ? fallback : std::stoi(it->second);
  }
  uint64_t get_u64(const std::string& key, uint64_t fallback) const {
    auto it = cfg.find(key);
    return it == cfg.end() ? fallback : std::stoull(it->second);
  }
};

uint64_t default_seed(const Options& o) {
  if (o.cfg.count("channel.seed")) return o.get_u64("channel.seed", 0);
  if (const char* env = std::getenv("SEMVID_SEED")) return std::stoull(env);
  return 0;
}

SegmenterConfig segmenter_from(const Options& o) {
  SegmenterConfig sc;
  std::string method = o.get("segmenter.method", "background_diff");
  if (method == "oracle") sc.method = SegmenterMethod::kOracle;
  else if (method == "background_diff") sc.method = SegmenterMethod::kBackgroundDiff;
  else if (method == "chroma_key") sc.method = SegmenterMethod::kChromaKey;
  else throw ConfigError("unknown segmenter.method: " + method);
  sc.threshold = o.get_d("segmenter.threshold", 0.1);
  sc.morph_radius = o.get_i("segmenter.morph_radius", 0);
  if (o.cfg.count("segmenter.reference"))
    sc.reference_background = read_ppm(o.get("segmenter.reference"));
  sc.key_r = o.get_d("segmenter.key_r", 0.0);
  sc.key_g = o.get_d("segmenter.key_g", 1.0);
  sc.key_b = o.get_d("segmenter.key_b", 0.0);
  return sc;
}

std::vector<AlphaMask> load_oracle_masks(const std::string& dir, int count) {
  std::vector<AlphaMask> masks;
  for (int t = 0; t < count; ++t) {
    fs::path p = fs::path(dir) / (std::to_string(t) + ".pgm");
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%06d.pgm", t);
    fs::path padded = fs::path(dir) / buf;
    if (fs::exists(padded)) p = padded;
    masks.push_back(frame_to_mask(read_pgm(p.string())));
  }
  return masks;
}

CodecConfig codec_config_from(const Options& o, int frame_count) {
  CodecConfig cc;
  cc.segmenter = segmenter_from(o);
  if (cc.segmenter.method == SegmenterMethod::kOracle) {
    std::string mask_dir = o.get("masks");
    if (mask_dir.empty()) throw ConfigError("oracle segmenter requires masks = <dir>");
    cc.oracle_masks = load_oracle_masks(mask_dir, frame_count);
    // estimate_alpha validates per-frame; give it a placeholder here.
    cc.segmenter.oracle_mask = cc.oracle_masks.empty() ? AlphaMask(1, 1) : cc.oracle_masks[0];
  }
  cc.motion.levels = o.get_i("motion.levels", 4);
  cc.motion.block_size = o.get_i("motion.block_size", 8);
  cc.motion.search_radius = o.get_i("motion.search_radius", 4);
  int lambda = o.get_i("lambda_id", 2048);
  if (o.cfg.count("params_file")) {
    cc.coder = load_params(o.get("params_file"));
  } else if (o.cfg.count("params_dir")) {
    fs::path p = fs::path(o.get("params_dir")) / ("params_lambda" + std::to_string(lambda) + ".txt");
    cc.coder = fs::exists(p) ? load_params(p.string()) : default_params(lambda);
  } else {
    cc.coder = default_params(lambda);
  }
  cc.channel.mode = parse_channel_mode(o.get("channel.mode", "ideal"));
  cc.channel.snr_db = o.get_d("channel.snr_db", 15.0);
  cc.channel.h = o.get_d("channel.h", 0.9);
  cc.channel.seed = default_seed(o);
  cc.moe_enabled = o.get_i("moe_enabled", 1) != 0;
  cc.intra_only = o.get_i("intra_only", 0) != 0;
  return cc;
}

template <typename T>
std::vector<T> parse_list(const std::string& s, T (*conv)(const std::string&)) {
  std::vector<T> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(conv(item));
  }
  return out;
}

int to_int(const std::string& s) { return std::stoi(s); }
double to_double(const std::string& s) { return std::stod(s); }

int cmd_segment(const Options& o) {
  VideoSequence v = read_sequence(o.get("input"));
  SegmenterConfig sc = segmenter_from(o);
  fs::create_directories(o.get("output"));
  std::vector<AlphaMask> oracle;
  if (sc.method == SegmenterMethod::kOracle)
    oracle = load_oracle_masks(o.get("masks"), v.frame_count());
  for (int t = 0; t < v.frame_count(); ++t) {
    if (sc.method == SegmenterMethod::kOracle) sc.oracle_mask = oracle[t];
    AlphaMask a = estimate_alpha(v.frames[t], sc);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%06d.pgm", t);
    write_pgm(mask_to_frame(a), (fs::path(o.get("output")) / buf).string());
  }
  return 0;
}

int cmd_encode(const Options& o) {
  VideoSequence v = read_sequence(o.get("input"));
  CodecConfig cc = codec_config_from(o, v.frame_count());
  EncodeResult enc = encode_stream(v, cc);
  write_bitstream(enc.stream, o.get("output"));
  uint64_t total = 0;
  for (uint64_t b : enc.per_frame_bits) total += b;
  std::cout << "encoded " << v.frame_count() << " frames, " << total << " bits, CBR(bits) "
            << cbr(enc.per_frame_bits, v.frames[0].height, v.frames[0].width,
                   v.frames[0].channels)
            << "\n";
  return 0;
}

int cmd_decode(const Options& o) {
  Bitstream b = read_bitstream(o.get("input"));
  CodecConfig cc;
  cc.motion.levels = o.get_i("motion.levels", 4);
  cc.motion.block_size = o.get_i("motion.block_size", 8);
  cc.motion.search_radius = o.get_i("motion.search_radius", 4);
  DecodeResult dec = decode_stream(b, cc);
  write_sequence(dec.reconstruction, o.get("output"));
  int concealed = 0;
  for (bool c : dec.concealed) concealed += c ? 1 : 0;
  std::cout << "decoded " << dec.reconstruction.frame_count() << " frames, " << concealed
            << " concealed\n";
  return 0;
}

int cmd_metrics(const Options& o) {
  VideoSequence ref = read_sequence(o.get("ref"));
  VideoSequence test = read_sequence(o.get("test"));
  if (ref.frame_count() != test.frame_count())
    throw DimensionError("metrics: frame count mismatch");
  Report r = evaluate(ref, test, std::vector<uint64_t>(ref.frame_count(), 0), {});
  std::cout << "mean_psnr_db " << r.mean_psnr << "\nmean_ms_ssim " << r.mean_ms_ssim << "\n";
  if (!o.get("report.csv").empty()) write_report_csv({r}, o.get("report.csv"));
  return 0;
}

int cmd_simulate(const Options& o) {
  VideoSequence v = read_sequence(o.get("input"));
  CodecConfig cc = codec_config_from(o, v.frame_count());
  SimulationGrid grid;
  if (o.cfg.count("sim.lambdas")) grid.lambdas = parse_list<int>(o.get("sim.lambdas"), to_int);
  if (o.cfg.count("sim.snrs")) grid.snrs_db = parse_list<double>(o.get("sim.snrs"), to_double);
  if (o.cfg.count("sim.modes")) {
    grid.modes.clear();
    for (const std::string& m : parse_list<std::string>(
             o.get("sim.modes"), +[](const std::string& s) { return s; }))
      grid.modes.push_back(parse_channel_mode(m));
  }
  grid.include_intra_baseline = o.get_i("sim.intra_baseline", 0) != 0;
  grid.include_moe_off = o.get_i("sim.moe_off", 0) != 0;
  if (o.cfg.count("params_dir")) grid.params_dir = o.get("params_dir");
  std::vector<Report> reports = simulate(v, cc, grid);
  if (!o.get("report.csv").empty()) write_report_csv(reports, o.get("report.csv"));
  if (!o.get("report.json").empty()) write_report_json(reports, o.get("report.json"));
  for (const Report& r : reports)
    std::cout << "lambda " << r.lambda_id << " mode " << r.mode << " snr " << r.snr_db
              << " cbr " << r.cbr << " psnr " << r.mean_psnr << " msssim " << r.mean_ms_ssim
              << "\n";
  return 0;
}

int cmd_tune(const Options& o) {
  std::vector<VideoSequence> train;
  for (const std::string& dir :
       parse_list<std::string>(o.get("input"), +[](const std::string& s) { return s; }))
    train.push_back(read_sequence(dir));
  if (train.empty()) throw ConfigError("tune: no training sequences");
  TuneOptions topts;
  topts.iterations = o.get_i("tune.iterations", 40);
  topts.fd_step = o.get_d("tune.fd_step", 0.02);
  topts.learning_rate = o.get_d("tune.learning_rate", 1e-4);
  topts.segmenter = segmenter_from(o);
  if (topts.segmenter.method == SegmenterMethod::kOracle)
    throw ConfigError("tune: oracle segmenter not supported from the CLI");
  topts.motion.levels = o.get_i("motion.levels", 4);
  topts.motion.block_size = o.get_i("motion.block_size", 8);
  topts.motion.search_radius = o.get_i("motion.search_radius", 4);
  std::string out_dir = o.get("output", ".");
  fs::create_directories(out_dir);
  std::vector<int> lambdas = o.cfg.count("sim.lambdas")
                                 ? parse_list<int>(o.get("sim.lambdas"), to_int)
                                 : std::vector<int>{256, 512, 1024, 2048};
  for (int lambda : lambdas) {
    CoderParams p = tune(train, lambda, topts);
    fs::path path = fs::path(out_dir) / ("params_lambda" + std::to_string(lambda) + ".txt");
    save_params(p, path.string());
    std::cout << "lambda " << lambda << ": q_step " << p.q_step << " scale_a " << p.scale_a
              << " scale_c " << p.scale_c << " -> " << path.string() << "\n";
  }
  return 0;
}

// Wire framing: frame_index 0 carries the header + background bytes, frame
// record t goes out as frame_index t + 1.
int cmd_send(const Options& o) {
  VideoSequence v = read_sequence(o.get("input"));
  CodecConfig cc = codec_config_from(o, v.frame_count());
  EncodeResult enc = encode_stream(v, cc);
  std::string dest = o.get("dest");
  size_t colon = dest.rfind(':');
  if (colon == std::string::npos) throw ConfigError("dest must be host:port");
  UdpSender sender(dest.substr(0, colon),
                   static_cast<uint16_t>(std::stoi(dest.substr(colon + 1))));
  size_t mtu = static_cast<size_t>(o.get_i("link.mtu", static_cast<int>(kDefaultMtu)));
  uint32_t stream_id = static_cast<uint32_t>(o.get_i("link.stream_id", 1));

  Bitstream header_only = enc.stream;
  header_only.frames.clear();
  header_only.header.frame_count = 0;  // receiver infers T from frame indices
  std::vector<uint8_t> header_bytes = serialize_bitstream(header_only);
  for (const Packet& p : packetize(header_bytes, stream_id, 0, mtu)) sender.send(p);
  for (size_t t = 0; t < enc.stream.frames.size(); ++t) {
    Bitstream one = enc.stream;
    one.frames.assign(1, enc.stream.frames[t]);
    one.header.frame_count = 1;
    std::vector<uint8_t> full = serialize_bitstream(one);
    // The header region is fixed-size; strip it and send just the record.
    std::vector<uint8_t> rec(full.begin() + header_bytes.size(), full.end());
    for (const Packet& p : packetize(rec, stream_id, static_cast<uint32_t>(t + 1), mtu))
      sender.send(p);
  }
  std::cout << "sent " << enc.stream.frames.size() << " frames to " << dest << "\n";
  return 0;
}

int cmd_recv(const Options& o) {
  std::string listen = o.get("listen");
  size_t colon = listen.rfind(':');
  uint16_t port = static_cast<uint16_t>(
      std::stoi(colon == std::string::npos ? listen : listen.substr(colon + 1)));
  UdpReceiver receiver(port);
  int timeout_ms = o.get_i("link.timeout_ms", 5000);

  std::map<uint32_t, std::vector<Packet>> by_frame;
  while (true) {
    std::optional<Packet> p = receiver.receive(timeout_ms);
    if (!p) break;
    by_frame[p->frame_index].push_back(std::move(*p));
  }
  auto it = by_frame.find(0);
  if (it == by_frame.end()) {
    std::cerr << "no stream header received\n";
    return 2;
  }
  ReassemblyResult header_res = depacketize(it->second, 0);
  if (!header_res.record) {
    std::cerr << "stream header incomplete\n";
    return 2;
  }
  Bitstream stream = parse_bitstream(*header_res.record);
  stream.frames.clear();
  // The header bundle carries frame_count 0; T is the highest index seen.
  uint32_t frame_count = 0;
  for (const auto& [idx, _] : by_frame) frame_count = std::max(frame_count, idx);
  int lost = 0;
  for (uint32_t t = 0; t < frame_count; ++t) {
    FrameRecord rec;
    auto fit = by_frame.find(t + 1);
    ReassemblyResult res = fit == by_frame.end() ? ReassemblyResult{}
                                                 : depacketize(fit->second, t + 1);
    if (res.record) {
      Bitstream one = stream;
      one.header.frame_count = 1;
      std::vector<uint8_t> bytes = serialize_bitstream(one);  // header + background
      bytes.insert(bytes.end(), res.record->begin(), res.record->end());
      Bitstream parsed = parse_bitstream(bytes);
      rec = parsed.frames.empty() ? FrameRecord{} : parsed.frames.front();
    } else {
      // Lost frame: leave an invalid record so decode conceals it.
      rec.record_crc = 0xFFFFFFFFu;
      ++lost;
    }
    stream.frames.push_back(std::move(rec));
  }
  stream.header.frame_count = frame_count;
  CodecConfig cc;
  cc.motion.levels = o.get_i("motion.levels", 4);
  cc.motion.block_size = o.get_i("motion.block_size", 8);
  cc.motion.search_radius = o.get_i("motion.search_radius", 4);
  DecodeResult dec = decode_stream(stream, cc);
  write_sequence(dec.reconstruction, o.get("out"));
  std::cout << "received " << frame_count << " frames, " << lost << " lost\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"semvid: semantic video communication pipeline"};
  app.require_subcommand(1);

  std::string config_path;
  app.add_option("--config", config_path, "flat name = value config file");

  struct Sub {
    CLI::App* cmd;
    std::map<std::string, std::string> overrides;
  };
  std::map<std::string, Sub> subs;
  auto add_sub = [&](const std::string& name, const std::string& desc,
                     const std::vector<std::pair<std::string, std::string>>& opts) {
    CLI::App* cmd = app.add_subcommand(name, desc);
    cmd->add_option("--config", config_path, "flat name = value config file");
    Sub& s = subs[name];
    s.cmd = cmd;
    for (const auto& [flag, key] : opts)
      cmd->add_option_function<std::string>(
          flag, [&s, key = key](const std::string& v) { s.overrides[key] = v; });
    return cmd;
  };

  add_sub("segment", "run the segmenter over a frame directory",
          {{"--input", "input"}, {"--output", "output"}, {"--masks", "masks"}});
  add_sub("encode", "encode a frame directory to an .svb stream",
          {{"--input", "input"}, {"--output", "output"}, {"--masks", "masks"},
           {"--lambda", "lambda_id"}, {"--params", "params_file"}});
  add_sub("decode", "decode an .svb stream to a frame directory",
          {{"--input", "input"}, {"--output", "output"}});
  add_sub("simulate", "run the encode/channel/decode grid and emit reports",
          {{"--input", "input"}, {"--csv", "report.csv"}, {"--json", "report.json"},
           {"--masks", "masks"}});
  add_sub("tune", "tune CoderParams per lambda on training sequences",
          {{"--input", "input"}, {"--output", "output"}});
  add_sub("send", "encode and transmit over UDP",
          {{"--input", "input"}, {"--dest", "dest"}, {"--masks", "masks"}});
  add_sub("recv", "receive over UDP and decode",
          {{"--listen", "listen"}, {"--out", "out"}});
  add_sub("metrics", "PSNR / MS-SSIM between two frame directories",
          {{"--ref", "ref"}, {"--test", "test"}, {"--csv", "report.csv"}});

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e, std::cerr, std::cerr);
    return 1;
  }

  try {
    Options o;
    if (!config_path.empty()) o.cfg = load_config(config_path);
    std::string name;
    for (auto& [n, s] : subs)
      if (s.cmd->parsed()) {
        name = n;
        for (auto& [k, v] : s.overrides) o.cfg[k] = v;  // flags override config
      }
    if (name == "segment") return cmd_segment(o);
    if (name == "encode") return cmd_encode(o);
    if (name == "decode") return cmd_decode(o);
    if (name == "simulate") return cmd_simulate(o);
    if (name == "tune") return cmd_tune(o);
    if (name == "send") return cmd_send(o);
    if (name == "recv") return cmd_recv(o);
    if (name == "metrics") return cmd_metrics(o);
    std::cerr << "unknown subcommand\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
