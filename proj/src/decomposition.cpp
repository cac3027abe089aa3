#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include <Eigen/QR>

#include "fiberalign/csv.hpp"
#include "fiberalign/decomp.hpp"
#include "fiberalign/errors.hpp"
#include "fiberalign/rng.hpp"

namespace fiberalign {

std::string_view to_string(Subspace s) noexcept {
  switch (s) {
    case Subspace::shared: return "shared";
    case Subspace::image: return "image";
    case Subspace::text: return "text";
  }
  return "?";
}

const Eigen::MatrixXd& SubspaceBases::operator[](Subspace s) const {
  switch (s) {
    case Subspace::shared: return shared;
    case Subspace::image: return image;
    case Subspace::text: return text;
  }
  throw DomainError("bad subspace");
}

Eigen::MatrixXd& SubspaceBases::operator[](Subspace s) {
  return const_cast<Eigen::MatrixXd&>(std::as_const(*this)[s]);
}

namespace {

constexpr Subspace kAll[] = {Subspace::shared, Subspace::image, Subspace::text};

double orthonormality_error(const Eigen::MatrixXd& b) {
  if (b.cols() == 0) return 0.0;
  const Eigen::MatrixXd gram = b.transpose() * b;
  return (gram - Eigen::MatrixXd::Identity(b.cols(), b.cols())).cwiseAbs().maxCoeff();
}

}  // namespace

Decomposition::Decomposition(SubspaceBases bases) : bases_(std::move(bases)) {
  const auto d = bases_.shared.rows();
  if (d < 1) throw DomainError("decomposition dimension must be >= 1");
  if (bases_.image.rows() != d || bases_.text.rows() != d) {
    throw DomainError("decomposition bases have different ambient dimensions");
  }
  if (bases_.shared.cols() + bases_.image.cols() + bases_.text.cols() > d) {
    throw DomainError("subspace dimensions exceed the ambient dimension");
  }
  for (Subspace s : kAll) {
    if (!bases_[s].allFinite()) throw DomainError("non-finite basis entry");
    if (orthonormality_error(bases_[s]) > kOrthonormalTol) {
      throw DomainError(std::string(to_string(s)) + " basis is not orthonormal");
    }
  }
}

Decomposition Decomposition::axis_aligned(std::size_t ds, std::size_t di, std::size_t dt) {
  const auto d = static_cast<Eigen::Index>(ds + di + dt);
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(d, d);
  const auto s = static_cast<Eigen::Index>(ds), i = static_cast<Eigen::Index>(di);
  return Decomposition({id.leftCols(s), id.middleCols(s, i), id.rightCols(d - s - i)});
}

Decomposition Decomposition::random_orthogonal(std::size_t ds, std::size_t di, std::size_t dt,
                                               RandomStream& rng) {
  const auto d = static_cast<Eigen::Index>(ds + di + dt);
  Eigen::MatrixXd g(d, d);
  for (Eigen::Index c = 0; c < d; ++c) g.col(c) = rng.normal_vector(d);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ();
  // sign fix makes the rotation Haar distributed
  const Eigen::MatrixXd& r = qr.matrixQR();
  for (Eigen::Index c = 0; c < d; ++c) {
    if (r(c, c) < 0.0) q.col(c) *= -1.0;
  }
  const auto s = static_cast<Eigen::Index>(ds), i = static_cast<Eigen::Index>(di);
  return Decomposition({q.leftCols(s), q.middleCols(s, i), q.rightCols(d - s - i)});
}

double Decomposition::max_cross_inner_product() const {
  double worst = 0.0;
  auto cross = [&](const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    if (a.cols() == 0 || b.cols() == 0) return;
    worst = std::max(worst, (a.transpose() * b).cwiseAbs().maxCoeff());
  };
  cross(bases_.shared, bases_.image);
  cross(bases_.shared, bases_.text);
  cross(bases_.image, bases_.text);
  return worst;
}

Eigen::MatrixXd Decomposition::projector(Subspace s) const {
  const auto& b = bases_[s];
  return b * b.transpose();
}

Eigen::VectorXd project(const Decomposition& dec, const Eigen::VectorXd& z, Subspace which) {
  if (static_cast<std::size_t>(z.size()) != dec.dim()) {
    throw DomainError("vector has " + std::to_string(z.size()) + " entries, decomposition dim is " +
                      std::to_string(dec.dim()));
  }
  const auto& b = dec.basis(which);
  return b * (b.transpose() * z);
}

ComponentSplit split(const Decomposition& dec, const Eigen::VectorXd& z) {
  if (!dec.complete()) throw DomainError("split needs d_s + d_I + d_T = d");
  if (!dec.orthogonal()) throw DomainError("split needs mutually orthogonal subspaces");
  return {project(dec, z, Subspace::shared), project(dec, z, Subspace::image),
          project(dec, z, Subspace::text)};
}

void orthonormalize_columns(Eigen::MatrixXd& basis) {
  for (Eigen::Index c = 0; c < basis.cols(); ++c) {
    for (int pass = 0; pass < 2; ++pass) {
      for (Eigen::Index p = 0; p < c; ++p) {
        basis.col(c) -= basis.col(p).dot(basis.col(c)) * basis.col(p);
      }
    }
    const double norm = basis.col(c).norm();
    if (!(norm > 1e-12)) throw DomainError("basis columns are linearly dependent");
    basis.col(c) /= norm;
  }
}

void write_decomposition(const Decomposition& dec, std::ostream& out) {
  out << "dim=" << dec.dim() << ",ds=" << dec.ds() << ",di=" << dec.di() << ",dt=" << dec.dt()
      << '\n';
  for (Subspace s : kAll) {
    const auto& b = dec.basis(s);
    for (Eigen::Index c = 0; c < b.cols(); ++c) {
      for (Eigen::Index r = 0; r < b.rows(); ++r) {
        if (r > 0) out << ',';
        out << format_double(b(r, c));
      }
      out << '\n';
    }
  }
}

Decomposition read_decomposition(std::istream& in, const std::string& source) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError(source, 1, "empty decomposition file");
  const auto header = split_csv(line);
  const char* keys[] = {"dim=", "ds=", "di=", "dt="};
  std::int64_t vals[4] = {};
  if (header.size() != 4) throw ParseError(source, 1, "expected header dim=,ds=,di=,dt=");
  for (int k = 0; k < 4; ++k) {
    if (!header[k].starts_with(keys[k])) throw ParseError(source, 1, "bad header field");
    const auto v = parse_int(header[k].substr(std::string_view(keys[k]).size()));
    if (!v || *v < 0) throw ParseError(source, 1, "bad header value");
    vals[k] = *v;
  }
  const auto d = static_cast<Eigen::Index>(vals[0]);
  SubspaceBases bases{Eigen::MatrixXd(d, vals[1]), Eigen::MatrixXd(d, vals[2]),
                      Eigen::MatrixXd(d, vals[3])};
  std::size_t line_no = 1;
  for (Subspace s : kAll) {
    auto& b = bases[s];
    for (Eigen::Index c = 0; c < b.cols(); ++c) {
      ++line_no;
      if (!std::getline(in, line)) throw ParseError(source, line_no, "missing basis vector");
      const auto fields = split_csv(line);
      if (static_cast<Eigen::Index>(fields.size()) != d) {
        throw ParseError(source, line_no, "basis vector needs " + std::to_string(d) + " values");
      }
      for (Eigen::Index r = 0; r < d; ++r) {
        const auto v = parse_double(fields[static_cast<std::size_t>(r)]);
        if (!v) throw ParseError(source, line_no, "bad number");
        b(r, c) = *v;
      }
    }
  }
  return Decomposition(std::move(bases));
}

void save_decomposition(const Decomposition& dec, const std::filesystem::path& path) {
  std::ostringstream buf;
  write_decomposition(dec, buf);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << buf.str();
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

Decomposition load_decomposition(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  return read_decomposition(in, path.string());
}

}  // namespace fiberalign
