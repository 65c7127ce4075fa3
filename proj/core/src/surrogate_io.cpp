#include <charconv>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <openssl/evp.h>

#include "ditto/errors.hpp"
#include "ditto/normconst.hpp"

namespace ditto {
namespace {

constexpr int kFormatVersion = 1;
constexpr std::string_view kMagic = "ditto-surrogate";

void put(std::string& out, double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  out.append(buf, res.ptr);
}

void put_row(std::string& out, const auto& values) {
  bool first = true;
  for (double v : values) {
    if (!first) out.push_back(' ');
    put(out, v);
    first = false;
  }
  out.push_back('\n');
}

double parse_double(std::string_view token) {
  double v = 0.0;
  const auto res = std::from_chars(token.data(), token.data() + token.size(), v);
  if (res.ec != std::errc() || res.ptr != token.data() + token.size()) {
    throw CorruptSurrogate("surrogate: malformed number '" + std::string(token) + "'");
  }
  return v;
}

class LineReader {
 public:
  explicit LineReader(std::string_view text) : text_(text) {}

  std::string_view next() {
    if (pos_ >= text_.size()) throw CorruptSurrogate("surrogate: unexpected end of file");
    const auto end = text_.find('\n', pos_);
    if (end == std::string_view::npos) throw CorruptSurrogate("surrogate: unterminated line");
    const auto line = text_.substr(pos_, end - pos_);
    pos_ = end + 1;
    return line;
  }

  void expect(std::string_view want) {
    if (next() != want) throw CorruptSurrogate("surrogate: expected section " + std::string(want));
  }

  std::vector<double> numbers(std::size_t count) {
    std::vector<double> out;
    std::string_view line = next();
    std::size_t p = 0;
    while (p < line.size()) {
      const auto q = line.find(' ', p);
      const auto tok = line.substr(p, q == std::string_view::npos ? std::string_view::npos : q - p);
      out.push_back(parse_double(tok));
      if (q == std::string_view::npos) break;
      p = q + 1;
    }
    if (out.size() != count) throw CorruptSurrogate("surrogate: row has the wrong number of entries");
    return out;
  }

  /// "key value" line.
  double keyed(std::string_view key) {
    const auto line = next();
    if (line.substr(0, key.size()) != key || line.size() <= key.size() || line[key.size()] != ' ') {
      throw CorruptSurrogate("surrogate: expected key " + std::string(key));
    }
    return parse_double(line.substr(key.size() + 1));
  }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("sha256: digest computation failed");
  }
  std::ostringstream os;
  os << std::hex << std::setfill('0');
  for (unsigned int i = 0; i < len; ++i) os << std::setw(2) << static_cast<int>(digest[i]);
  return os.str();
}

std::string surrogate_to_string(const GpSurrogate& s) {
  const int d = s.dim();
  const int k = s.size();
  std::string body;
  body += std::string(kMagic) + " " + std::to_string(kFormatVersion) + "\n";
  body += "[meta]\n";
  body += "dim " + std::to_string(d) + "\n";
  body += "count " + std::to_string(k) + "\n";
  body += "nugget ";
  put(body, s.nugget);
  body += "\nball_radius ";
  put(body, s.ball_radius);
  body += "\nsigma2 ";
  put(body, s.sigma2);
  body += "\n";
  put_row(body, s.d_diag);
  body += "[design]\n";
  for (int i = 0; i < k; ++i) {
    std::vector<double> row(s.points.row(i).begin(), s.points.row(i).end());
    row.push_back(s.values[i]);
    put_row(body, row);
  }
  body += "[beta]\n";
  put_row(body, s.beta);
  body += "[resid_solve]\n";
  put_row(body, s.resid_solve);
  body += "[chol]\n";
  for (int i = 0; i < k; ++i) put_row(body, s.chol.row(i).head(i + 1));
  body += "digest sha256 " + sha256_hex(body) + "\n";
  return body;
}

GpSurrogate surrogate_from_string(const std::string& text) {
  const std::string_view all(text);
  // Version is checked before the digest so a format bump is reported as such.
  const auto eol = all.find('\n');
  if (eol == std::string_view::npos) throw CorruptSurrogate("surrogate: missing header");
  const auto header = all.substr(0, eol);
  if (header.substr(0, kMagic.size()) != kMagic) throw CorruptSurrogate("surrogate: not a surrogate file");
  const std::string want_header = std::string(kMagic) + " " + std::to_string(kFormatVersion);
  if (header != want_header) {
    throw CorruptSurrogate("surrogate: unsupported version '" + std::string(header.substr(kMagic.size())) +
                           "', expected " + std::to_string(kFormatVersion));
  }

  const auto tag = all.rfind("digest sha256 ");
  if (tag == std::string_view::npos || all.back() != '\n') throw CorruptSurrogate("surrogate: missing digest");
  const auto body = all.substr(0, tag);
  const auto stored = all.substr(tag + 14, all.size() - tag - 15);
  if (sha256_hex(body) != stored) throw CorruptSurrogate("surrogate: digest mismatch");

  LineReader in(body);
  in.next();
  in.expect("[meta]");
  const int d = static_cast<int>(in.keyed("dim"));
  const int k = static_cast<int>(in.keyed("count"));
  if (d < 1 || k < 1) throw CorruptSurrogate("surrogate: bad dimensions");
  GpSurrogate s;
  s.nugget = in.keyed("nugget");
  s.ball_radius = in.keyed("ball_radius");
  s.sigma2 = in.keyed("sigma2");
  const auto dd = in.numbers(static_cast<std::size_t>(d));
  s.d_diag = Eigen::Map<const Vector>(dd.data(), d);
  in.expect("[design]");
  s.points.resize(k, d);
  s.values.resize(k);
  for (int i = 0; i < k; ++i) {
    const auto row = in.numbers(static_cast<std::size_t>(d + 1));
    for (int j = 0; j < d; ++j) s.points(i, j) = row[static_cast<std::size_t>(j)];
    s.values[i] = row[static_cast<std::size_t>(d)];
  }
  in.expect("[beta]");
  const auto beta = in.numbers(static_cast<std::size_t>(d + 1));
  s.beta = Eigen::Map<const Vector>(beta.data(), d + 1);
  in.expect("[resid_solve]");
  const auto resid = in.numbers(static_cast<std::size_t>(k));
  s.resid_solve = Eigen::Map<const Vector>(resid.data(), k);
  in.expect("[chol]");
  s.chol = Matrix::Zero(k, k);
  for (int i = 0; i < k; ++i) {
    const auto row = in.numbers(static_cast<std::size_t>(i + 1));
    for (int j = 0; j <= i; ++j) s.chol(i, j) = row[static_cast<std::size_t>(j)];
  }
  return s;
}

void surrogate_save(const GpSurrogate& surrogate, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("surrogate: cannot open '" + path + "' for writing");
  out << surrogate_to_string(surrogate);
  if (!out) throw Error("surrogate: write to '" + path + "' failed");
}

GpSurrogate surrogate_load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("surrogate: cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return surrogate_from_string(buf.str());
}

}  // namespace ditto
