#include "stressnet/formats.hpp"

#include <array>
#include <cstring>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

namespace stressnet {

namespace {

// little-endian scalar I/O; written bytewise so the formats do not depend
// on host byte order
void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
}
void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
void put_f64(std::string& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  put_u64(out, bits);
}
void put_f32(std::string& out, float v) {
  std::uint32_t bits;
  std::memcpy(&bits, &v, 4);
  put_u32(out, bits);
}

class Reader {
 public:
  Reader(const std::filesystem::path& path, const char* magic) : path_(path.string()) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::IoError, "cannot open " + path_);
    std::ostringstream ss;
    ss << in.rdbuf();
    buf_ = ss.str();
    if (buf_.size() < 4) fail(ErrorKind::TruncatedFile, path_ + " shorter than magic");
    if (std::memcmp(buf_.data(), magic, 4) != 0) {
      fail(ErrorKind::BadMagic, path_ + " is not a " + std::string(magic) + " file");
    }
    pos_ = 4;
  }

  std::uint16_t u16() {
    need(2);
    auto b = bytes(2);
    return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
  }
  std::uint32_t u32() {
    need(4);
    auto b = bytes(4);
    return b[0] | (b[1] << 8) | (b[2] << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
  }
  std::uint64_t u64() {
    std::uint64_t lo = u32();
    std::uint64_t hi = u32();
    return lo | (hi << 32);
  }
  double f64() {
    std::uint64_t bits = u64();
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
  }
  float f32() {
    std::uint32_t bits = u32();
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
  }
  std::uint8_t u8() {
    need(1);
    return static_cast<std::uint8_t>(buf_[pos_++]);
  }
  std::string str(std::size_t n) {
    need(n);
    std::string s = buf_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  void raw(void* dst, std::size_t n) {
    need(n);
    std::memcpy(dst, buf_.data() + pos_, n);
    pos_ += n;
  }
  std::size_t remaining() const { return buf_.size() - pos_; }
  const std::string& path() const { return path_; }

 private:
  std::array<std::uint8_t, 8> bytes(std::size_t n) {
    std::array<std::uint8_t, 8> b{};
    for (std::size_t i = 0; i < n; ++i) b[i] = static_cast<std::uint8_t>(buf_[pos_ + i]);
    pos_ += n;
    return b;
  }
  void need(std::size_t n) const {
    if (buf_.size() - pos_ < n) fail(ErrorKind::TruncatedFile, path_ + " ends mid-field");
  }
  std::string path_;
  std::string buf_;
  std::size_t pos_ = 0;
};

void write_file(const std::filesystem::path& path, const std::string& buf) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::IoError, "cannot open " + path.string() + " for writing");
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) fail(ErrorKind::IoError, "write failed: " + path.string());
}

std::string video_header(const char* magic, std::uint32_t width, std::uint32_t height,
                         std::uint32_t frames, double fps, std::uint16_t bpp) {
  std::string out;
  out.append(magic, 4);
  put_u32(out, width);
  put_u32(out, height);
  put_u32(out, frames);
  put_f64(out, fps);
  put_u16(out, bpp);
  out.append(14, '\0');
  return out;  // exactly 40 bytes
}

struct VideoHeader {
  std::uint32_t width, height, frames;
  double fps;
  std::uint16_t bpp;
};

VideoHeader read_video_header(Reader& r, std::uint16_t expected_bpp) {
  VideoHeader h{};
  h.width = r.u32();
  h.height = r.u32();
  h.frames = r.u32();
  h.fps = r.f64();
  h.bpp = r.u16();
  r.str(14);  // reserved
  if (h.bpp != expected_bpp) fail(ErrorKind::BadMagic, r.path() + ": unexpected bits per pixel");
  if (!(h.fps > 0.0)) fail(ErrorKind::IoError, r.path() + ": non-positive fps");
  const std::uint64_t px = static_cast<std::uint64_t>(h.width) * h.height;
  if (px != 0 && std::numeric_limits<std::uint64_t>::max() / px < h.frames) {
    fail(ErrorKind::DimensionOverflow, r.path() + ": dimensions overflow");
  }
  const std::uint64_t samples = px * h.frames;
  const std::uint64_t bytes_per = expected_bpp / 8;
  if (samples > std::numeric_limits<std::size_t>::max() / bytes_per) {
    fail(ErrorKind::DimensionOverflow, r.path() + ": payload overflows size_t");
  }
  if (r.remaining() < samples * bytes_per) {
    fail(ErrorKind::TruncatedFile, r.path() + ": payload shorter than header declares");
  }
  return h;
}

}  // namespace

void write_tvf(const std::filesystem::path& path, const ThermalClip& clip) {
  std::string buf = video_header("TVF1", static_cast<std::uint32_t>(clip.width),
                                 static_cast<std::uint32_t>(clip.height),
                                 static_cast<std::uint32_t>(clip.frame_count()), clip.fps, 16);
  buf.reserve(buf.size() + clip.data.size() * 2);
  for (std::uint16_t v : clip.data) put_u16(buf, v);
  write_file(path, buf);
}

ThermalClip read_tvf(const std::filesystem::path& path) {
  Reader r(path, "TVF1");
  VideoHeader h = read_video_header(r, 16);
  ThermalClip clip;
  clip.width = h.width;
  clip.height = h.height;
  clip.fps = h.fps;
  clip.t0_seconds = 0.0;
  const std::size_t samples = static_cast<std::size_t>(h.width) * h.height * h.frames;
  clip.data.resize(samples);
  for (std::size_t i = 0; i < samples; ++i) clip.data[i] = r.u16();
  return clip;
}

void write_fvf(const std::filesystem::path& path, const FeatureClip& clip) {
  std::string buf = video_header("FVF1", static_cast<std::uint32_t>(clip.width),
                                 static_cast<std::uint32_t>(clip.height),
                                 static_cast<std::uint32_t>(clip.frame_count()), clip.fps, 32);
  buf.reserve(buf.size() + clip.data.size() * 4);
  for (double v : clip.data) put_f32(buf, static_cast<float>(v));
  write_file(path, buf);
}

FeatureClip read_fvf(const std::filesystem::path& path) {
  Reader r(path, "FVF1");
  VideoHeader h = read_video_header(r, 32);
  FeatureClip clip;
  clip.width = h.width;
  clip.height = h.height;
  clip.fps = h.fps;
  clip.t0_seconds = 0.0;
  const std::size_t samples = static_cast<std::size_t>(h.width) * h.height * h.frames;
  clip.data.resize(samples);
  for (std::size_t i = 0; i < samples; ++i) clip.data[i] = static_cast<double>(r.f32());
  return clip;
}

namespace {

void append_tensor(std::string& buf, const std::string& name, const Tensor& t) {
  if (name.size() > 0xffff) fail(ErrorKind::IoError, "tensor name too long");
  put_u16(buf, static_cast<std::uint16_t>(name.size()));
  buf.append(name);
  if (t.shape.size() > 0xff) fail(ErrorKind::IoError, "tensor rank too large");
  buf.push_back(static_cast<char>(t.shape.size()));
  for (std::size_t d : t.shape) put_u32(buf, static_cast<std::uint32_t>(d));
  for (double v : t.data) put_f32(buf, static_cast<float>(v));
}

std::string snw_body(const std::vector<NamedTensorCRef>& tensors,
                     const std::map<std::string, std::string>& descriptor) {
  std::string buf;
  buf.append("SNW1", 4);
  put_u32(buf, static_cast<std::uint32_t>(tensors.size()));
  for (const auto& nt : tensors) append_tensor(buf, nt.name, *nt.tensor);
  std::string desc;
  for (const auto& [k, v] : descriptor) desc += k + "=" + v + "\n";
  put_u32(buf, static_cast<std::uint32_t>(desc.size()));
  buf.append(desc);
  return buf;
}

struct SnwContents {
  std::map<std::string, Tensor> tensors;
  std::map<std::string, std::string> descriptor;
};

SnwContents read_snw_contents(const std::filesystem::path& path) {
  Reader r(path, "SNW1");
  SnwContents out;
  const std::uint32_t count = r.u32();
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::uint16_t name_len = r.u16();
    std::string name = r.str(name_len);
    const std::uint8_t rank = r.u8();
    std::vector<std::size_t> shape(rank);
    std::uint64_t elems = 1;
    for (std::uint8_t d = 0; d < rank; ++d) {
      shape[d] = r.u32();
      if (shape[d] != 0 && elems > std::numeric_limits<std::uint64_t>::max() / shape[d]) {
        fail(ErrorKind::DimensionOverflow, path.string() + ": tensor dims overflow");
      }
      elems *= shape[d];
    }
    if (elems * 4 > r.remaining()) {
      fail(ErrorKind::TruncatedFile, path.string() + ": tensor data truncated");
    }
    Tensor t(shape);
    for (std::uint64_t e = 0; e < elems; ++e) t.data[e] = static_cast<double>(r.f32());
    if (!out.tensors.emplace(name, std::move(t)).second) {
      fail(ErrorKind::DuplicateTensorName, path.string() + ": duplicate tensor " + name);
    }
  }
  const std::uint32_t desc_len = r.u32();
  std::string desc = r.str(desc_len);
  std::istringstream ss(desc);
  std::string line;
  while (std::getline(ss, line)) {
    auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    out.descriptor[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return out;
}

std::string join_sizes(const std::vector<std::size_t>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(v[i]);
  }
  return s;
}

std::vector<std::size_t> split_sizes(const std::string& s) {
  std::vector<std::size_t> out;
  std::istringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(static_cast<std::size_t>(std::stoull(item)));
  }
  return out;
}

const std::string& descriptor_field(const SnwContents& c, const std::string& key,
                                    const std::string& path) {
  auto it = c.descriptor.find(key);
  if (it == c.descriptor.end()) {
    fail(ErrorKind::ShapeMismatchWithDescriptor, path + ": descriptor missing " + key);
  }
  return it->second;
}

Tensor take_tensor(SnwContents& c, const std::string& name, const std::vector<std::size_t>& shape,
                   const std::string& path) {
  auto it = c.tensors.find(name);
  if (it == c.tensors.end()) {
    fail(ErrorKind::ShapeMismatchWithDescriptor, path + ": missing tensor " + name);
  }
  if (it->second.shape != shape) {
    fail(ErrorKind::ShapeMismatchWithDescriptor, path + ": tensor " + name + " has wrong shape");
  }
  Tensor t = std::move(it->second);
  c.tensors.erase(it);
  return t;
}

}  // namespace

void write_snw(const std::filesystem::path& path, const Model& model) {
  std::map<std::string, std::string> desc;
  desc["kind"] = "isti";
  desc["input_height"] = std::to_string(model.desc.input_height);
  desc["input_width"] = std::to_string(model.desc.input_width);
  desc["conv_channels"] = join_sizes(model.desc.conv_channels);
  desc["lstm_layers"] = std::to_string(model.desc.lstm_layers);
  desc["lstm_hidden"] = std::to_string(model.desc.lstm_hidden);
  desc["head_hidden"] = std::to_string(model.desc.head_hidden);
  desc["n_bins"] = std::to_string(model.desc.n_bins);
  char scale[40];
  std::snprintf(scale, sizeof(scale), "%.17g", model.desc.input_scale);
  desc["input_scale"] = scale;
  write_file(path, snw_body(named_tensors(model.params), desc));
}

Model read_snw(const std::filesystem::path& path) {
  SnwContents c = read_snw_contents(path);
  const std::string p = path.string();
  if (descriptor_field(c, "kind", p) != "isti") {
    fail(ErrorKind::ShapeMismatchWithDescriptor, p + ": not an isti model");
  }
  ModelDescriptor d;
  d.input_height = std::stoull(descriptor_field(c, "input_height", p));
  d.input_width = std::stoull(descriptor_field(c, "input_width", p));
  d.conv_channels = split_sizes(descriptor_field(c, "conv_channels", p));
  d.lstm_layers = std::stoull(descriptor_field(c, "lstm_layers", p));
  d.lstm_hidden = std::stoull(descriptor_field(c, "lstm_hidden", p));
  d.head_hidden = std::stoull(descriptor_field(c, "head_hidden", p));
  d.n_bins = std::stoull(descriptor_field(c, "n_bins", p));
  auto scale_it = c.descriptor.find("input_scale");
  if (scale_it != c.descriptor.end()) d.input_scale = std::stod(scale_it->second);
  d.validate();

  Model m;
  m.desc = d;
  m.params = Model::zero_parameters(d);
  for (auto& ref : named_tensors(m.params)) {
    *ref.tensor = take_tensor(c, ref.name, ref.tensor->shape, p);
  }
  if (!c.tensors.empty()) {
    fail(ErrorKind::ShapeMismatchWithDescriptor,
         p + ": unexpected tensor " + c.tensors.begin()->first);
  }
  return m;
}

void write_snw(const std::filesystem::path& path, const StressModel& model) {
  std::map<std::string, std::string> desc;
  desc["kind"] = "stress";
  desc["n_in"] = std::to_string(model.n_in);
  desc["hidden0"] = std::to_string(model.fc0.w.shape[0]);
  desc["hidden1"] = std::to_string(model.fc1.w.shape[0]);
  std::vector<NamedTensorCRef> tensors = {
      {"fc0.w", &model.fc0.w, false}, {"fc0.b", &model.fc0.b, false},
      {"fc1.w", &model.fc1.w, false}, {"fc1.b", &model.fc1.b, false},
      {"fc2.w", &model.fc2.w, false}, {"fc2.b", &model.fc2.b, false},
  };
  write_file(path, snw_body(tensors, desc));
}

StressModel read_snw_stress(const std::filesystem::path& path) {
  SnwContents c = read_snw_contents(path);
  const std::string p = path.string();
  if (descriptor_field(c, "kind", p) != "stress") {
    fail(ErrorKind::ShapeMismatchWithDescriptor, p + ": not a stress model");
  }
  const std::size_t n_in = std::stoull(descriptor_field(c, "n_in", p));
  const std::size_t h0 = std::stoull(descriptor_field(c, "hidden0", p));
  const std::size_t h1 = std::stoull(descriptor_field(c, "hidden1", p));
  StressModel m;
  m.n_in = n_in;
  m.fc0.w = take_tensor(c, "fc0.w", {h0, n_in}, p);
  m.fc0.b = take_tensor(c, "fc0.b", {h0}, p);
  m.fc1.w = take_tensor(c, "fc1.w", {h1, h0}, p);
  m.fc1.b = take_tensor(c, "fc1.b", {h1}, p);
  m.fc2.w = take_tensor(c, "fc2.w", {1, h1}, p);
  m.fc2.b = take_tensor(c, "fc2.b", {1}, p);
  if (!c.tensors.empty()) {
    fail(ErrorKind::ShapeMismatchWithDescriptor,
         p + ": unexpected tensor " + c.tensors.begin()->first);
  }
  return m;
}

std::string snw_kind(const std::filesystem::path& path) {
  SnwContents c = read_snw_contents(path);
  auto it = c.descriptor.find("kind");
  return it == c.descriptor.end() ? "" : it->second;
}

}  // namespace stressnet
