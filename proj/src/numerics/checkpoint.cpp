#include "alternator/numerics/checkpoint.hpp"

#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>

#include "alternator/errors.hpp"

namespace alternator {

namespace {

template <typename T>
void put_le(std::string& out, T value) {
  std::uint64_t bits = 0;
  std::memcpy(&bits, &value, sizeof(T));
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xFF));
}

class Reader {
 public:
  explicit Reader(std::string_view data) : data_(data) {}

  template <typename T>
  T get() {
    need(sizeof(T));
    std::uint64_t bits = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    }
    pos_ += sizeof(T);
    T value;
    std::memcpy(&value, &bits, sizeof(T));
    return value;
  }

  std::string_view bytes(std::size_t n) {
    need(n);
    auto s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  bool done() const { return pos_ == data_.size(); }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > data_.size()) throw FormatError("checkpoint: truncated file");
  }
  std::string_view data_;
  std::size_t pos_ = 0;
};

std::string format_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

}  // namespace

const Tensor& Checkpoint::at(std::string_view name) const {
  for (const auto& t : tensors) {
    if (t.name == name) return t.value;
  }
  throw FormatError("checkpoint: no tensor named '" + std::string(name) + "'");
}

std::uint64_t spec_digest(std::string_view description) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : description) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot open " + tmp.string() + " for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw FormatError("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  std::string out(kCheckpointMagic);
  put_le<std::uint64_t>(out, ckpt.digest);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(ckpt.tensors.size()));
  for (const auto& [name, value] : ckpt.tensors) {
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
    out += name;
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(value.rank()));
    for (auto d : value.shape()) put_le<std::uint64_t>(out, d);
    for (double v : value.values()) put_le<double>(out, v);
  }
  write_file_atomic(path, out);
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  const std::string data = read_file(path);
  Reader r(data);
  if (r.bytes(kCheckpointMagic.size()) != kCheckpointMagic) {
    throw FormatError("checkpoint: bad magic in " + path.string());
  }
  Checkpoint ckpt;
  ckpt.digest = r.get<std::uint64_t>();
  const auto count = r.get<std::uint32_t>();
  for (std::uint32_t i = 0; i < count; ++i) {
    NamedTensor t;
    t.name = std::string(r.bytes(r.get<std::uint32_t>()));
    const auto rank = r.get<std::uint32_t>();
    std::vector<std::size_t> shape;
    std::size_t n = 1;
    for (std::uint32_t k = 0; k < rank; ++k) {
      shape.push_back(static_cast<std::size_t>(r.get<std::uint64_t>()));
      n *= shape.back();
    }
    std::vector<double> values(n);
    for (auto& v : values) v = r.get<double>();
    t.value = Tensor(std::move(shape), std::move(values));
    ckpt.tensors.push_back(std::move(t));
  }
  if (!r.done()) throw FormatError("checkpoint: trailing bytes in " + path.string());
  return ckpt;
}

std::string export_text(const Checkpoint& ckpt) {
  std::string out = "# alternator parameter export\ndigest " + std::to_string(ckpt.digest) + "\n";
  for (const auto& [name, value] : ckpt.tensors) {
    out += "tensor " + name + "\nshape";
    for (auto d : value.shape()) out += " " + std::to_string(d);
    out += "\nvalues";
    for (double v : value.values()) out += " " + format_double(v);
    out += "\n";
  }
  return out;
}

Checkpoint import_text(std::string_view text) {
  std::istringstream in{std::string(text)};
  Checkpoint ckpt;
  std::string line;
  std::size_t lineno = 0;
  NamedTensor* current = nullptr;
  std::vector<std::size_t> shape;
  auto fail = [&](const std::string& msg) {
    throw FormatError("parameter export line " + std::to_string(lineno) + ": " + msg);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "digest") {
      ls >> ckpt.digest;
    } else if (key == "tensor") {
      ckpt.tensors.push_back({});
      current = &ckpt.tensors.back();
      ls >> current->name;
      shape.clear();
    } else if (key == "shape") {
      if (!current) fail("shape before tensor");
      std::size_t d;
      while (ls >> d) shape.push_back(d);
    } else if (key == "values") {
      if (!current) fail("values before tensor");
      std::vector<double> values;
      std::string tok;
      while (ls >> tok) {
        double v = 0.0;
        auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (res.ec != std::errc() || res.ptr != tok.data() + tok.size()) fail("bad number '" + tok + "'");
        values.push_back(v);
      }
      try {
        current->value = Tensor(shape, std::move(values));
      } catch (const DimensionError& e) {
        fail(e.what());
      }
    } else {
      fail("unknown key '" + key + "'");
    }
  }
  return ckpt;
}

}  // namespace alternator
