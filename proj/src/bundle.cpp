#include "vsa/bundle.hpp"

#include <zlib.h>

#include <array>
#include <cstring>
#include <fstream>
#include <iterator>
#include <random>

#include "vsa/errors.hpp"

namespace vsa {

namespace {

constexpr std::array<char, 4> kMagic = {'V', 'S', 'A', '1'};
constexpr std::uint32_t kVersion = 1;
constexpr std::size_t kHeaderSize = 4 + 4 + 8;
constexpr std::size_t kTrailerSize = 4;

class Writer {
 public:
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void i64(std::int64_t v) { u64(static_cast<std::uint64_t>(v)); }
  void bytes(std::span<const std::uint8_t> b) { out_.insert(out_.end(), b.begin(), b.end()); }
  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    out_.insert(out_.end(), s.begin(), s.end());
  }
  std::vector<std::uint8_t>& data() { return out_; }

 private:
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  Reader(const std::uint8_t* data, std::size_t size) : data_(data), size_(size) {}

  std::uint8_t u8() { return *need(1); }
  std::uint32_t u32() {
    const std::uint8_t* p = need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    const std::uint8_t* p = need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
    return v;
  }
  std::int64_t i64() { return static_cast<std::int64_t>(u64()); }
  std::span<const std::uint8_t> bytes(std::size_t n) { return {need(n), n}; }
  std::string str() {
    const std::uint32_t n = u32();
    const auto b = bytes(n);
    return std::string(b.begin(), b.end());
  }
  bool done() const { return pos_ == size_; }

 private:
  const std::uint8_t* need(std::size_t n) {
    if (size_ - pos_ < n) throw BundleError(BundleErrorKind::kTruncated, "bundle payload truncated");
    const std::uint8_t* p = data_ + pos_;
    pos_ += n;
    return p;
  }

  const std::uint8_t* data_;
  std::size_t size_;
  std::size_t pos_ = 0;
};

std::vector<std::uint8_t> serialize_payload(const ModelBundle& b) {
  Writer w;
  w.str(print_network(b.network));
  w.u32(static_cast<std::uint32_t>(b.network.time_steps));
  w.u32(static_cast<std::uint32_t>(b.input.channels));
  w.u32(static_cast<std::uint32_t>(b.input.height));
  w.u32(static_cast<std::uint32_t>(b.input.width));
  w.u32(static_cast<std::uint32_t>(b.format.total_bits));
  w.u32(static_cast<std::uint32_t>(b.format.frac_bits));
  w.u32(static_cast<std::uint32_t>(b.layers.size()));
  for (const LayerParams& l : b.layers) {
    const BinaryWeightTensor& t = l.weights;
    w.u32(static_cast<std::uint32_t>(t.out_channels()));
    w.u32(static_cast<std::uint32_t>(t.in_channels()));
    w.u32(static_cast<std::uint32_t>(t.kernel_h()));
    w.u32(static_cast<std::uint32_t>(t.kernel_w()));
    w.u32(static_cast<std::uint32_t>(l.neurons.size()));
    w.bytes(pack_bits(t.sign_bits()));
    for (const FoldedNeuronParams& n : l.neurons) {
      w.i64(n.bias.raw);
      w.i64(n.threshold.raw);
      w.u8(n.compare_flipped ? 1 : 0);
    }
  }
  return std::move(w.data());
}

ModelBundle parse_payload(Reader& r) {
  ModelBundle b;
  const std::string text = r.str();
  try {
    b.network = parse_network(text);
  } catch (const ParseError& e) {
    throw BundleError(BundleErrorKind::kFormat, std::string("bundle network text: ") + e.what());
  }
  b.network.time_steps = static_cast<int>(r.u32());
  b.input.channels = static_cast<int>(r.u32());
  b.input.height = static_cast<int>(r.u32());
  b.input.width = static_cast<int>(r.u32());
  b.format.total_bits = static_cast<int>(r.u32());
  b.format.frac_bits = static_cast<int>(r.u32());
  const std::uint32_t count = r.u32();
  if (count != b.network.layers.size()) {
    throw BundleError(BundleErrorKind::kFormat, "bundle layer table does not match its network");
  }
  for (std::uint32_t i = 0; i < count; ++i) {
    LayerParams l;
    const int o = static_cast<int>(r.u32());
    const int in = static_cast<int>(r.u32());
    const int kh = static_cast<int>(r.u32());
    const int kw = static_cast<int>(r.u32());
    const std::uint32_t neurons = r.u32();
    if (o > 0) {
      l.weights = BinaryWeightTensor(o, in, kh, kw);
      const auto bits = unpack_bits(r.bytes((l.weights.count() + 7) / 8), l.weights.count());
      for (int a = 0; a < o; ++a)
        for (int c = 0; c < in; ++c)
          for (int y = 0; y < kh; ++y)
            for (int x = 0; x < kw; ++x)
              l.weights.set_sign(a, c, y, x, bits[((static_cast<std::size_t>(a) * in + c) * kh + y) * kw + x]);
    }
    for (std::uint32_t n = 0; n < neurons; ++n) {
      FoldedNeuronParams p;
      p.bias.raw = r.i64();
      p.threshold.raw = r.i64();
      p.compare_flipped = r.u8() != 0;
      l.neurons.push_back(p);
    }
    b.layers.push_back(std::move(l));
  }
  if (!r.done()) throw BundleError(BundleErrorKind::kFormat, "trailing bytes in bundle payload");
  return b;
}

std::uint32_t crc(std::span<const std::uint8_t> bytes) {
  return static_cast<std::uint32_t>(
      ::crc32(::crc32(0L, Z_NULL, 0), bytes.data(), static_cast<uInt>(bytes.size())));
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

// Uniform double in [lo, hi) from the raw 64-bit engine output, so generated
// bundles do not depend on the standard library's distribution algorithms.
double uniform(std::mt19937_64& rng, double lo, double hi) {
  const double unit = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * unit;
}

}  // namespace

std::uint32_t ModelBundle::checksum() const { return crc(serialize_payload(*this)); }

void ModelBundle::check_consistency() const {
  const ValidatedNetwork v = validated();
  if (layers.size() != v.layers.size()) throw ShapeError("bundle has wrong number of layer entries");
  for (std::size_t i = 0; i < v.layers.size(); ++i) {
    const AnnotatedLayer& a = v.layers[i];
    const LayerParams& p = layers[i];
    const std::string where = "bundle layer " + std::to_string(i) + ": ";
    if (!a.spec.has_weights()) {
      if (p.weights.count() != 0 || !p.neurons.empty()) throw ShapeError(where + "pooling layer carries parameters");
      continue;
    }
    const Shape3 in = a.compute_input();
    const BinaryWeightTensor& w = p.weights;
    if (w.out_channels() != a.spec.out_channels || w.in_channels() != in.channels ||
        w.kernel_h() != a.spec.kernel_h || w.kernel_w() != a.spec.kernel_w) {
      throw ShapeError(where + "weight tensor does not match layer description");
    }
    if (p.neurons.size() != static_cast<std::size_t>(a.spec.out_channels)) {
      throw ShapeError(where + "expected one folded parameter set per output channel");
    }
  }
}

std::vector<std::uint8_t> serialize_bundle(const ModelBundle& bundle) {
  const std::vector<std::uint8_t> payload = serialize_payload(bundle);
  Writer w;
  w.bytes({reinterpret_cast<const std::uint8_t*>(kMagic.data()), kMagic.size()});
  w.u32(kVersion);
  w.u64(payload.size());
  w.bytes(payload);
  w.u32(crc(payload));
  return std::move(w.data());
}

ModelBundle deserialize_bundle(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < kMagic.size() || std::memcmp(bytes.data(), kMagic.data(), kMagic.size()) != 0) {
    throw BundleError(BundleErrorKind::kBadMagic, "not a VSA1 bundle (bad magic)");
  }
  if (bytes.size() < kHeaderSize) throw BundleError(BundleErrorKind::kTruncated, "bundle header truncated");
  Reader header(bytes.data(), kHeaderSize);
  header.bytes(4);
  const std::uint32_t version = header.u32();
  if (version != kVersion) {
    throw BundleError(BundleErrorKind::kFormat, "unsupported bundle version " + std::to_string(version));
  }
  const std::uint64_t length = header.u64();
  if (bytes.size() - kHeaderSize < kTrailerSize || bytes.size() - kHeaderSize - kTrailerSize < length) {
    throw BundleError(BundleErrorKind::kTruncated, "bundle truncated: payload declares " +
                                                       std::to_string(length) + " bytes");
  }
  const std::span<const std::uint8_t> payload(bytes.data() + kHeaderSize, length);
  Reader trailer(bytes.data() + kHeaderSize + length, kTrailerSize);
  if (trailer.u32() != crc(payload)) throw BundleError(BundleErrorKind::kChecksum, "bundle checksum mismatch");
  if (bytes.size() != kHeaderSize + length + kTrailerSize) {
    throw BundleError(BundleErrorKind::kFormat, "trailing bytes after bundle checksum");
  }
  Reader r(payload.data(), payload.size());
  ModelBundle b = parse_payload(r);
  try {
    b.format.validate();
    b.check_consistency();
  } catch (const Error& e) {
    throw BundleError(BundleErrorKind::kFormat, e.what());
  }
  return b;
}

void save_bundle(const ModelBundle& bundle, const std::filesystem::path& path) {
  write_file(path, serialize_bundle(bundle));
}

ModelBundle load_bundle(const std::filesystem::path& path) { return deserialize_bundle(read_file(path)); }

ModelBundle generate_random_bundle(const NetworkDescription& net, Shape3 input, std::uint64_t seed,
                                   const RandomBundleOptions& options) {
  options.format.validate();
  const ValidatedNetwork v = validate(net, input);
  std::mt19937_64 rng(seed);
  ModelBundle b{net, input, options.format, {}};
  for (const AnnotatedLayer& a : v.layers) {
    LayerParams p;
    if (a.spec.has_weights()) {
      const Shape3 in = a.compute_input();
      p.weights = BinaryWeightTensor(a.spec.out_channels, in.channels, a.spec.kernel_h, a.spec.kernel_w);
      for (int o = 0; o < a.spec.out_channels; ++o)
        for (int c = 0; c < in.channels; ++c)
          for (int y = 0; y < a.spec.kernel_h; ++y)
            for (int x = 0; x < a.spec.kernel_w; ++x) p.weights.set_sign(o, c, y, x, rng() & 1u);
      const double scale = a.spec.kind == LayerKind::kEncodingConv ? options.encoding_input_scale : 1.0;
      for (int o = 0; o < a.spec.out_channels; ++o) {
        BNParams bn;
        bn.gamma = uniform(rng, 0.5, 2.0);
        bn.beta = uniform(rng, -1.0, 1.0);
        bn.mean = uniform(rng, -1.0, 1.0);
        bn.variance = uniform(rng, 0.25, 4.0);
        bn.epsilon = options.bn_epsilon;
        p.neurons.push_back(fold_bn(bn, a.spec.v_th, options.format, scale));
      }
    }
    b.layers.push_back(std::move(p));
  }
  return b;
}

ByteImage generate_random_image(Shape3 shape, std::uint64_t seed) {
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<std::uint8_t> data(shape.count());
  for (auto& v : data) v = static_cast<std::uint8_t>(rng() >> 56);
  return ByteImage(shape, std::move(data));
}

void save_input(const ByteImage& image, const std::filesystem::path& path) {
  Writer w;
  w.u32(static_cast<std::uint32_t>(image.shape().channels));
  w.u32(static_cast<std::uint32_t>(image.shape().height));
  w.u32(static_cast<std::uint32_t>(image.shape().width));
  w.bytes(image.data());
  write_file(path, w.data());
}

ByteImage load_input(const std::filesystem::path& path) {
  const std::vector<std::uint8_t> bytes = read_file(path);
  if (bytes.size() < 12) throw IoError("input tensor file " + path.string() + " is missing its header");
  Reader r(bytes.data(), bytes.size());
  Shape3 s;
  s.channels = static_cast<int>(r.u32());
  s.height = static_cast<int>(r.u32());
  s.width = static_cast<int>(r.u32());
  if (!s.positive() || bytes.size() - 12 != s.count()) {
    throw IoError("input tensor file " + path.string() + " does not match its header " + s.str());
  }
  return ByteImage(s, std::vector<std::uint8_t>(bytes.begin() + 12, bytes.end()));
}

}  // namespace vsa
