#include "fmtk/symplectic.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "fmtk/error.hpp"

namespace fmtk {

Mat standard_j(int n) {
  Mat j = Mat::Zero(2 * n, 2 * n);
  j.topRightCorner(n, n) = Mat::Identity(n, n);
  j.bottomLeftCorner(n, n) = -Mat::Identity(n, n);
  return j;
}

Mat assemble_blocks(const Mat& a, const Mat& b, const Mat& c, const Mat& d) {
  const auto n = a.rows();
  if (a.cols() != n || b.rows() != n || b.cols() != n || c.rows() != n || c.cols() != n ||
      d.rows() != n || d.cols() != n) {
    throw Error(Errc::DimensionMismatch, "blocks must all be N x N");
  }
  Mat m(2 * n, 2 * n);
  m.topLeftCorner(n, n) = a;
  m.topRightCorner(n, n) = b;
  m.bottomLeftCorner(n, n) = c;
  m.bottomRightCorner(n, n) = d;
  return m;
}

double symplectic_residual(const Mat& m) {
  const Mat j = standard_j(static_cast<int>(m.rows() / 2));
  const double r1 = (m.transpose() * j * m - j).cwiseAbs().maxCoeff();
  const double r2 = (m * j * m.transpose() - j).cwiseAbs().maxCoeff();
  return std::max(r1, r2);
}

SympMatrix validate_symplectic(const Mat& m, double tol) {
  if (m.rows() != m.cols() || m.rows() < 2 || m.rows() % 2 != 0) {
    throw Error(Errc::DimensionOdd, "expected a square 2N x 2N matrix, got " +
                                        std::to_string(m.rows()) + " x " + std::to_string(m.cols()));
  }
  if (!m.allFinite()) {
    throw Error(Errc::NotSymplectic, "matrix has non-finite entries");
  }
  const double res = symplectic_residual(m);
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff() * m.cwiseAbs().maxCoeff());
  if (res > tol * scale) {
    std::ostringstream os;
    os << "residual " << res << " exceeds " << tol * scale;
    throw Error(Errc::NotSymplectic, os.str(), res);
  }
  return SympMatrix(m, res);
}

namespace {

double asymmetry(const Mat& x) {
  const double scale = std::max(1.0, x.cwiseAbs().maxCoeff());
  return (x - x.transpose()).cwiseAbs().maxCoeff() / scale;
}

}  // namespace

FreeSympMatrix make_free(const SympMatrix& m, double tol) {
  const int n = m.n();
  const Mat b = m.B();
  const double det = b.determinant();
  if (!(std::abs(det) > tol)) {
    throw Error(Errc::SingularB, "|det B| = " + std::to_string(std::abs(det)), std::abs(det));
  }
  Mat b_inv = b.inverse();
  const double inv_res = (b * b_inv - Mat::Identity(n, n)).cwiseAbs().maxCoeff();
  const Mat db = m.D() * b_inv;
  const Mat ba = b_inv * m.A();
  // B⁻¹ amplifies the construction error by up to cond(B); 1e-8 leaves room
  // for cond(B) ~ 100 on top of the 1e-10 symplectic tolerance.
  const double sym_tol = 1e-8;
  if (inv_res > sym_tol || asymmetry(db) > sym_tol || asymmetry(ba) > sym_tol) {
    throw Error(Errc::NotSymplectic, "DB^-1 or B^-1 A not symmetric",
                std::max(asymmetry(db), asymmetry(ba)));
  }
  return FreeSympMatrix{m, std::move(b_inv), det, std::abs(det)};
}

SympMatrix inverse(const SympMatrix& m) {
  const Mat a = m.A(), b = m.B(), c = m.C(), d = m.D();
  Mat inv = assemble_blocks(d.transpose(), -b.transpose(), -c.transpose(), a.transpose());
  return validate_symplectic(inv);
}

SympMatrix compose(const SympMatrix& m1, const SympMatrix& m2) {
  if (m1.n() != m2.n()) {
    throw Error(Errc::DimensionMismatch, "compose: N differs");
  }
  // Products of larger matrices carry proportionally larger rounding error.
  const double scale = std::max(1.0, m1.matrix().cwiseAbs().maxCoeff() *
                                         m2.matrix().cwiseAbs().maxCoeff());
  return validate_symplectic(m1.matrix() * m2.matrix(), kSymplecticTol * scale);
}

FreeSympMatrix free_from_generators(const Mat& p, const Mat& b, const Mat& q) {
  const Mat a = b * q;
  const Mat d = p * b;
  const Mat c = p * b * q - b.inverse().transpose();
  return make_free(validate_symplectic(assemble_blocks(a, b, c, d)));
}

FreeSympMatrix random_free(int n, std::uint64_t seed) {
  if (n < 1) {
    throw Error(Errc::InvalidArgument, "random_free: n must be >= 1");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  auto draw = [&](bool symmetric) {
    Mat x(n, n);
    for (int i = 0; i < n; ++i) {
      for (int k = 0; k < n; ++k) x(i, k) = uni(rng);
    }
    if (symmetric) x = (0.5 * (x + x.transpose())).eval();
    return x;
  };
  for (;;) {
    Mat b = draw(false);
    const double det = b.determinant();
    if (std::abs(det) < 0.1) continue;
    Eigen::JacobiSVD<Mat> svd(b);
    const auto& s = svd.singularValues();
    if (s(0) / s(n - 1) > 100.0) continue;
    const Mat p = draw(true);
    const Mat q = draw(true);
    return free_from_generators(p, b, q);
  }
}

Table1Kind parse_table1_kind(const std::string& name) {
  if (name == "fourier") return Table1Kind::fourier;
  if (name == "frft") return Table1Kind::frft;
  if (name == "fresnel") return Table1Kind::fresnel;
  if (name == "lorentz") return Table1Kind::lorentz;
  throw Error(Errc::InvalidArgument, "unknown matrix kind '" + name + "'");
}

const char* table1_kind_name(Table1Kind kind) {
  switch (kind) {
    case Table1Kind::fourier: return "fourier";
    case Table1Kind::frft: return "frft";
    case Table1Kind::fresnel: return "fresnel";
    case Table1Kind::lorentz: return "lorentz";
  }
  return "?";
}

SympMatrix table1_matrix(Table1Kind kind, const std::vector<double>& params, int n) {
  if (n < 1) throw Error(Errc::InvalidArgument, "table1_matrix: n must be >= 1");
  const Mat zero = Mat::Zero(n, n);
  const Mat id = Mat::Identity(n, n);
  if (kind == Table1Kind::fourier) {
    return validate_symplectic(assemble_blocks(zero, id, -id, zero));
  }
  if (static_cast<int>(params.size()) != n) {
    throw Error(Errc::DegenerateParameter, std::string(table1_kind_name(kind)) +
                                               " needs exactly " + std::to_string(n) + " parameters");
  }
  Vec p = Eigen::Map<const Vec>(params.data(), n);
  switch (kind) {
    case Table1Kind::frft: {
      const Mat c = p.array().cos().matrix().asDiagonal();
      const Mat s = p.array().sin().matrix().asDiagonal();
      return validate_symplectic(assemble_blocks(c, s, -s, c));
    }
    case Table1Kind::fresnel: {
      for (double b : params) {
        if (b == 0.0) throw Error(Errc::DegenerateParameter, "fresnel parameter must be nonzero");
      }
      const Mat b = p.asDiagonal();
      return validate_symplectic(assemble_blocks(id, b, zero, id));
    }
    case Table1Kind::lorentz: {
      const Mat ch = p.array().cosh().matrix().asDiagonal();
      const Mat sh = p.array().sinh().matrix().asDiagonal();
      return validate_symplectic(assemble_blocks(ch, sh, sh, ch));
    }
    case Table1Kind::fourier: break;
  }
  throw Error(Errc::InvalidArgument, "unreachable table1 kind");
}

bool is_diagonal(const Mat& m, double tol) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index k = 0; k < m.cols(); ++k) {
      if (i != k && std::abs(m(i, k)) > tol) return false;
    }
  }
  return true;
}

namespace {

nlohmann::json block_json(const Mat& b) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < b.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index k = 0; k < b.cols(); ++k) row.push_back(b(i, k));
    rows.push_back(std::move(row));
  }
  return rows;
}

Mat block_from_json(const nlohmann::json& j, int n, const char* name) {
  if (!j.is_array() || static_cast<int>(j.size()) != n) {
    throw Error(Errc::ConfigParse, std::string("block ") + name + " must have " + std::to_string(n) + " rows");
  }
  Mat b(n, n);
  for (int i = 0; i < n; ++i) {
    const auto& row = j[i];
    if (!row.is_array() || static_cast<int>(row.size()) != n) {
      throw Error(Errc::ConfigParse, std::string("block ") + name + " row has wrong length");
    }
    for (int k = 0; k < n; ++k) {
      if (!row[k].is_number()) throw Error(Errc::ConfigParse, std::string("block ") + name + " entry not numeric");
      b(i, k) = row[k].get<double>();
    }
  }
  return b;
}

}  // namespace

nlohmann::json matrix_to_json(const SympMatrix& m) {
  return {{"n", m.n()},
          {"blocks", {{"A", block_json(m.A())}, {"B", block_json(m.B())}, {"C", block_json(m.C())}, {"D", block_json(m.D())}}}};
}

SympMatrix matrix_from_json(const nlohmann::json& j, double tol) {
  if (!j.is_object() || !j.contains("n") || !j.contains("blocks")) {
    throw Error(Errc::ConfigParse, "matrix JSON needs keys 'n' and 'blocks'");
  }
  for (const auto& item : j.items()) {
    if (item.key() != "n" && item.key() != "blocks") {
      throw Error(Errc::ConfigParse, "unknown matrix key '" + item.key() + "'");
    }
  }
  const int n = j.at("n").get<int>();
  if (n < 1) throw Error(Errc::ConfigParse, "matrix n must be >= 1");
  const auto& b = j.at("blocks");
  for (const char* key : {"A", "B", "C", "D"}) {
    if (!b.contains(key)) throw Error(Errc::ConfigParse, std::string("missing block ") + key);
  }
  return validate_symplectic(assemble_blocks(block_from_json(b.at("A"), n, "A"), block_from_json(b.at("B"), n, "B"),
                                             block_from_json(b.at("C"), n, "C"), block_from_json(b.at("D"), n, "D")),
                             tol);
}

}  // namespace fmtk
