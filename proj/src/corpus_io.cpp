#include <charconv>
#include <fstream>
#include <sstream>

#include "fiberalign/csv.hpp"
#include "fiberalign/embed.hpp"
#include "fiberalign/errors.hpp"

namespace fiberalign {

std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return {buf, res.ptr};
}

std::optional<double> parse_double(std::string_view text) noexcept {
  double v = 0.0;
  const auto* end = text.data() + text.size();
  const auto res = std::from_chars(text.data(), end, v);
  if (res.ec != std::errc() || res.ptr != end || text.empty()) return std::nullopt;
  return v;
}

std::optional<std::int64_t> parse_int(std::string_view text) noexcept {
  std::int64_t v = 0;
  const auto* end = text.data() + text.size();
  const auto res = std::from_chars(text.data(), end, v);
  if (res.ec != std::errc() || res.ptr != end || text.empty()) return std::nullopt;
  return v;
}

std::vector<std::string_view> split_csv(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

namespace {

constexpr std::string_view kPairsMarker = "#pairs";

void check_writable_id(const std::string& id) {
  if (id.find_first_of(",\r\n") != std::string::npos || id.starts_with('#')) {
    throw DomainError("id '" + id + "' cannot be written to a corpus file");
  }
}

}  // namespace

void write_corpus(const EmbeddedCorpus& c, std::ostream& out) {
  out << "dim=" << c.dim() << '\n';
  for (const auto& p : c.points()) {
    check_writable_id(p.id);
    out << p.id << ',' << to_string(p.modality);
    for (Eigen::Index k = 0; k < p.vector.size(); ++k) out << ',' << format_double(p.vector[k]);
    out << '\n';
  }
  if (!c.pairs().empty()) {
    out << kPairsMarker << '\n';
    for (const auto& [img, txt] : c.pairs()) out << img << ',' << txt << '\n';
  }
}

EmbeddedCorpus read_corpus(std::istream& in, const std::string& source) {
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line)) throw ParseError(source, line_no, "empty corpus file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (!line.starts_with("dim=")) throw ParseError(source, line_no, "expected header 'dim=<d>'");
  const auto dim = parse_int(std::string_view(line).substr(4));
  if (!dim || *dim < 1) throw ParseError(source, line_no, "invalid dimension in header");

  EmbeddedCorpus corpus(static_cast<std::size_t>(*dim));
  bool in_pairs = false;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view(line);
    if (!view.empty() && view.back() == '\r') view.remove_suffix(1);
    if (view.empty()) continue;
    if (view == kPairsMarker) {
      in_pairs = true;
      continue;
    }
    const auto fields = split_csv(view);
    try {
      if (in_pairs) {
        if (fields.size() != 2) throw ParseError(source, line_no, "pair row needs 2 fields");
        corpus.add_pair(std::string(fields[0]), std::string(fields[1]));
        continue;
      }
      if (fields.size() < 2) throw ParseError(source, line_no, "point row needs id and modality");
      const auto modality = parse_modality(fields[1]);
      if (!modality) {
        throw ParseError(source, line_no, "unknown modality '" + std::string(fields[1]) + "'");
      }
      if (fields.size() - 2 != static_cast<std::size_t>(*dim)) {
        throw DomainError("expected " + std::to_string(*dim) + " values, found " +
                          std::to_string(fields.size() - 2));
      }
      Eigen::VectorXd v(*dim);
      for (Eigen::Index k = 0; k < v.size(); ++k) {
        const auto x = parse_double(fields[static_cast<std::size_t>(k) + 2]);
        if (!x) {
          throw ParseError(source, line_no,
                           "bad number '" + std::string(fields[static_cast<std::size_t>(k) + 2]) +
                               "'");
        }
        v[k] = *x;
      }
      corpus.add_point(std::string(fields[0]), *modality, std::move(v));
    } catch (const DomainError& e) {
      throw DomainError(source + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return corpus;
}

void save_corpus(const EmbeddedCorpus& c, const std::filesystem::path& path) {
  std::ostringstream buf;
  write_corpus(c, buf);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << buf.str();
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

EmbeddedCorpus load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  return read_corpus(in, path.string());
}

}  // namespace fiberalign
