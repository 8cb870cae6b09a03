#include "cqk/io.hpp"

#include <array>
#include <bit>
#include <cctype>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <iterator>
#include <ostream>
#include <sstream>

namespace cqk {

namespace {

void put_value(std::ostream& os, double v) {
  std::array<char, 32> buf;
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  os.write(buf.data(), res.ptr - buf.data());
}

void put_row(std::ostream& os, const std::vector<double>& v) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) os << ' ';
    put_value(os, v[i]);
  }
  os << '\n';
}

class Tokens {
 public:
  explicit Tokens(std::string text) : text_(std::move(text)) {}

  std::string_view next() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    const std::size_t start = pos_;
    while (pos_ < text_.size() && !std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (start == pos_) throw FormatError("unexpected end of instance file");
    return std::string_view(text_).substr(start, pos_ - start);
  }

  double number() {
    const auto tok = next();
    double v;
    const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
      throw FormatError("malformed number '" + std::string(tok) + "'");
    return v;
  }

  std::size_t count() {
    const auto tok = next();
    std::size_t v;
    const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
      throw FormatError("malformed length '" + std::string(tok) + "'");
    return v;
  }

  bool at_end() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    return pos_ == text_.size();
  }

 private:
  std::string text_;
  std::size_t pos_ = 0;
};

std::uint64_t to_little(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::big) return __builtin_bswap64(v);
  return v;
}

void put_u64(std::ostream& os, std::uint64_t v) {
  v = to_little(v);
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

void put_f64(std::ostream& os, double v) { put_u64(os, std::bit_cast<std::uint64_t>(v)); }

void put_f64s(std::ostream& os, const std::vector<double>& v) {
  if constexpr (std::endian::native == std::endian::little) {
    os.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
  } else {
    for (double x : v) put_f64(os, x);
  }
}

std::uint64_t get_u64(std::istream& is) {
  std::uint64_t v;
  if (!is.read(reinterpret_cast<char*>(&v), sizeof v)) throw FormatError("truncated binary instance");
  return to_little(v);
}

double get_f64(std::istream& is) { return std::bit_cast<double>(get_u64(is)); }

std::vector<double> get_f64s(std::istream& is, std::size_t n) {
  std::vector<double> v(n);
  if (!is.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(double))))
    throw FormatError("truncated binary instance");
  if constexpr (std::endian::native == std::endian::big)
    for (auto& x : v) x = std::bit_cast<double>(to_little(std::bit_cast<std::uint64_t>(x)));
  return v;
}

AnyInstance read_binary(std::istream& is, bool simplex) {
  const std::uint64_t n = get_u64(is);
  if (n == 0) throw FormatError("instance length is zero");
  if (simplex) {
    SimplexInstance<double> s;
    s.r = get_f64(is);
    s.y = get_f64s(is, n);
    return s;
  }
  Instance<double> inst;
  for (auto* v : {&inst.d, &inst.a, &inst.b, &inst.l, &inst.u}) *v = get_f64s(is, n);
  inst.r = get_f64(is);
  return inst;
}

AnyInstance read_text(std::string text) {
  Tokens tok(std::move(text));
  const auto magic = std::string(tok.next());
  if (magic == "CQK1") {
    const std::size_t n = tok.count();
    if (n == 0) throw FormatError("instance length is zero");
    Instance<double> inst;
    for (auto* v : {&inst.d, &inst.a, &inst.b, &inst.l, &inst.u}) {
      v->resize(n);
      for (auto& x : *v) x = tok.number();
    }
    inst.r = tok.number();
    if (!tok.at_end()) throw FormatError("trailing data after instance");
    return inst;
  }
  if (magic == "SPX1") {
    const std::size_t n = tok.count();
    if (n == 0) throw FormatError("instance length is zero");
    SimplexInstance<double> s;
    s.r = tok.number();
    s.y.resize(n);
    for (auto& x : s.y) x = tok.number();
    if (!tok.at_end()) throw FormatError("trailing data after instance");
    return s;
  }
  throw FormatError("unknown instance header '" + magic + "'");
}

}  // namespace

void write_text(std::ostream& os, const Instance<double>& inst) {
  os << "CQK1 " << inst.size() << '\n';
  for (const auto* v : {&inst.d, &inst.a, &inst.b, &inst.l, &inst.u}) put_row(os, *v);
  put_value(os, inst.r);
  os << '\n';
}

void write_text(std::ostream& os, const SimplexInstance<double>& inst) {
  os << "SPX1 " << inst.size() << ' ';
  put_value(os, inst.r);
  os << '\n';
  put_row(os, inst.y);
}

void write_binary(std::ostream& os, const Instance<double>& inst) {
  os.write("CQKB", 4);
  put_u64(os, inst.size());
  for (const auto* v : {&inst.d, &inst.a, &inst.b, &inst.l, &inst.u}) put_f64s(os, *v);
  put_f64(os, inst.r);
}

void write_binary(std::ostream& os, const SimplexInstance<double>& inst) {
  os.write("SPXB", 4);
  put_u64(os, inst.size());
  put_f64(os, inst.r);
  put_f64s(os, inst.y);
}

AnyInstance read_instance(std::istream& is) {
  char magic[4];
  if (!is.read(magic, 4)) throw FormatError("instance file is too short");
  if (std::memcmp(magic, "CQKB", 4) == 0) return read_binary(is, false);
  if (std::memcmp(magic, "SPXB", 4) == 0) return read_binary(is, true);
  std::string text(magic, 4);
  text.append(std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>());
  return read_text(std::move(text));
}

AnyInstance read_instance_file(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("cannot open " + path.string());
  return read_instance(is);
}

void write_instance_file(const std::filesystem::path& path, const AnyInstance& inst, FileFormat fmt) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw FormatError("cannot open " + path.string() + " for writing");
  std::visit(
      [&](const auto& v) {
        if (fmt == FileFormat::Binary)
          write_binary(os, v);
        else
          write_text(os, v);
      },
      inst);
  if (!os) throw FormatError("write failed for " + path.string());
}

}  // namespace cqk
