#pragma once

#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include "figmn/data.hpp"
#include "figmn/model.hpp"

// Plain-text model persistence. All reals are written with 17 significant
// decimal digits, which round-trips the exact double bit pattern: a loaded
// model reproduces every prediction bit-for-bit. The format is line-oriented
// and inspectable; unknown versions are rejected.

namespace figmn {

inline constexpr int kModelFormatVersion = 1;

// Optional feature standardization recorded with a model so predict can apply
// the same transform. Identity entries (shift 0, scale 1) mark untouched
// dimensions.
struct Standardizer {
  Vec shift;
  Vec scale;
};

struct ModelFile {
  Mixture mixture;
  std::optional<Standardizer> standardizer;
};

namespace detail {

inline void write_vec(std::ostream& out, const char* key, const Vec& v) {
  out << key;
  for (Eigen::Index i = 0; i < v.size(); ++i) out << ' ' << format_real(v[i]);
  out << '\n';
}

inline void write_mat_row_major(std::ostream& out, const char* key,
                                const Mat& m) {
  out << key;
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      out << ' ' << format_real(m(r, c));
  out << '\n';
}

class ModelReader {
 public:
  explicit ModelReader(std::istream& in) : in_(in) {}

  std::string word() {
    std::string w;
    if (!(in_ >> w)) throw ParseError("model file: unexpected end of file");
    return w;
  }

  void expect(const std::string& key) {
    const std::string w = word();
    if (w != key)
      throw ParseError("model file: expected '" + key + "', found '" + w +
                       "'");
  }

  double real(const std::string& key) {
    expect(key);
    return real();
  }

  double real() {
    const std::string w = word();
    char* end = nullptr;
    const double v = std::strtod(w.c_str(), &end);
    if (end != w.c_str() + w.size())
      throw ParseError("model file: bad number '" + w + "'");
    return v;
  }

  long long integer(const std::string& key) {
    expect(key);
    const std::string w = word();
    try {
      return std::stoll(w);
    } catch (const std::exception&) {
      throw ParseError("model file: bad integer '" + w + "'");
    }
  }

  Vec vec(const std::string& key, Eigen::Index len) {
    expect(key);
    Vec v(len);
    for (Eigen::Index i = 0; i < len; ++i) v[i] = real();
    return v;
  }

  Mat mat_row_major(const std::string& key, Eigen::Index dim) {
    expect(key);
    Mat m(dim, dim);
    for (Eigen::Index r = 0; r < dim; ++r)
      for (Eigen::Index c = 0; c < dim; ++c) m(r, c) = real();
    return m;
  }

 private:
  std::istream& in_;
};

}  // namespace detail

inline void save_model(const ModelFile& model, std::ostream& out) {
  const Mixture& mix = model.mixture;
  const auto& cfg = mix.config;
  out << "figmn-model " << kModelFormatVersion << '\n';
  out << "representation "
      << (cfg.representation == Representation::precision ? "precision"
                                                          : "covariance")
      << '\n';
  out << "dimension " << cfg.dimension << '\n';
  out << "delta " << format_real(cfg.delta) << '\n';
  out << "beta " << format_real(cfg.beta) << '\n';
  out << "v_min " << cfg.v_min << '\n';
  out << "sp_min " << format_real(cfg.sp_min) << '\n';
  out << "pruning " << (cfg.pruning_enabled ? 1 : 0) << '\n';
  out << "chi2_threshold " << format_real(cfg.chi2_threshold) << '\n';
  detail::write_vec(out, "dataset_std", cfg.dataset_std);
  out << "standardizer " << (model.standardizer ? 1 : 0) << '\n';
  if (model.standardizer) {
    detail::write_vec(out, "shift", model.standardizer->shift);
    detail::write_vec(out, "scale", model.standardizer->scale);
  }
  out << "skipped_updates " << mix.skipped_updates << '\n';
  out << "components " << mix.components.size() << '\n';
  for (const auto& comp : mix.components) {
    detail::write_vec(out, "mean", comp.mean);
    detail::write_mat_row_major(
        out, "matrix",
        cfg.representation == Representation::precision ? comp.prec
                                                        : comp.cov);
    out << "det_cov " << format_real(comp.det_cov) << '\n';
    out << "sp " << format_real(comp.sp) << '\n';
    out << "age " << comp.age << '\n';
    out << "prior " << format_real(comp.prior) << '\n';
  }
  out << "end\n";
}

inline void save_model(const ModelFile& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write '" + path + "'");
  save_model(model, out);
}

inline ModelFile load_model(std::istream& in) {
  detail::ModelReader r(in);
  r.expect("figmn-model");
  const long long version = [&] {
    const std::string w = r.word();
    try {
      return std::stoll(w);
    } catch (const std::exception&) {
      throw ParseError("model file: bad version '" + w + "'");
    }
  }();
  if (version != kModelFormatVersion)
    throw ParseError("model file: unsupported format version " +
                     std::to_string(version) + " (expected " +
                     std::to_string(kModelFormatVersion) + ")");

  ModelFile model;
  LearnerConfig cfg;
  r.expect("representation");
  const std::string repr = r.word();
  if (repr == "precision")
    cfg.representation = Representation::precision;
  else if (repr == "covariance")
    cfg.representation = Representation::covariance;
  else
    throw ParseError("model file: unknown representation '" + repr + "'");
  const auto dim = static_cast<Eigen::Index>(r.integer("dimension"));
  if (dim < 1) throw ParseError("model file: bad dimension");
  cfg.delta = r.real("delta");
  cfg.beta = r.real("beta");
  cfg.v_min = r.integer("v_min");
  cfg.sp_min = r.real("sp_min");
  cfg.pruning_enabled = r.integer("pruning") != 0;
  cfg.chi2_threshold = r.real("chi2_threshold");
  cfg.dataset_std = r.vec("dataset_std", dim);
  cfg.dimension = static_cast<int>(dim);
  model.mixture.config = cfg;  // stored values verbatim, no recomputation

  if (r.integer("standardizer") != 0) {
    Standardizer st;
    st.shift = r.vec("shift", dim);
    st.scale = r.vec("scale", dim);
    model.standardizer = st;
  }
  model.mixture.skipped_updates =
      static_cast<std::uint64_t>(r.integer("skipped_updates"));
  const long long k = r.integer("components");
  if (k < 0) throw ParseError("model file: bad component count");
  model.mixture.components.resize(static_cast<std::size_t>(k));
  for (auto& comp : model.mixture.components) {
    comp.mean = r.vec("mean", dim);
    Mat m = r.mat_row_major("matrix", dim);
    if (cfg.representation == Representation::precision)
      comp.prec = std::move(m);
    else
      comp.cov = std::move(m);
    comp.det_cov = r.real("det_cov");
    comp.sp = r.real("sp");
    comp.age = r.integer("age");
    comp.prior = r.real("prior");
  }
  r.expect("end");
  return model;
}

inline ModelFile load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  return load_model(in);
}

}  // namespace figmn
