#include "driftlab/io.hpp"

#include "driftlab/error.hpp"

#include <Eigen/Eigenvalues>

#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

namespace driftlab {

namespace {

class Writer {
public:
    explicit Writer(ArtifactKind kind)
    {
        const char* m = artifact_magic(kind);
        bytes_.insert(bytes_.end(), m, m + 4);
        u32(kFormatVersion);
    }
    void u8(std::uint8_t v) { bytes_.push_back(v); }
    void u32(std::uint32_t v)
    {
        for (int i = 0; i < 4; ++i)
            bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void u64(std::uint64_t v)
    {
        for (int i = 0; i < 8; ++i)
            bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
    void f64s(const double* p, std::size_t n)
    {
        for (std::size_t i = 0; i < n; ++i)
            f64(p[i]);
    }
    void matrix(const Eigen::MatrixXd& m) { f64s(m.data(), static_cast<std::size_t>(m.size())); }
    void basis(const BasisSpec& s)
    {
        u8(static_cast<std::uint8_t>(s.family()));
        u32(static_cast<std::uint32_t>(s.vanishing_moments()));
        u32(static_cast<std::uint32_t>(s.level()));
        u32(static_cast<std::uint32_t>(s.dim()));
        u32(static_cast<std::uint32_t>(s.cascade_depth()));
    }
    std::vector<std::uint8_t> take() { return std::move(bytes_); }

private:
    std::vector<std::uint8_t> bytes_;
};

class Reader {
public:
    Reader(const std::vector<std::uint8_t>& bytes, ArtifactKind kind) : bytes_(bytes), kind_(kind)
    {
        need(4, "magic");
        if (std::memcmp(bytes_.data(), artifact_magic(kind), 4) != 0)
            throw FormatError(std::string("bad magic: expected ") + artifact_magic(kind) + " (" + artifact_name(kind) +
                              ")");
        pos_ = 4;
        const std::uint32_t version = u32("version");
        if (version != kFormatVersion)
            throw FormatError(std::string(artifact_name(kind)) + ": unsupported format version " +
                              std::to_string(version));
    }

    std::uint8_t u8(const char* field)
    {
        need(1, field);
        return bytes_[pos_++];
    }
    std::uint32_t u32(const char* field)
    {
        need(4, field);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i)
            v |= static_cast<std::uint32_t>(bytes_[pos_ + i]) << (8 * i);
        pos_ += 4;
        return v;
    }
    std::uint64_t u64(const char* field)
    {
        need(8, field);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i)
            v |= static_cast<std::uint64_t>(bytes_[pos_ + i]) << (8 * i);
        pos_ += 8;
        return v;
    }
    double f64(const char* field) { return std::bit_cast<double>(u64(field)); }
    void f64s(double* out, std::size_t n, const char* field)
    {
        if (n > (bytes_.size() - pos_) / 8)
            need(n * 8, field);
        for (std::size_t i = 0; i < n; ++i)
            out[i] = f64(field);
    }
    Eigen::MatrixXd matrix(Eigen::Index rows, Eigen::Index cols, const char* field)
    {
        Eigen::MatrixXd m(rows, cols);
        f64s(m.data(), static_cast<std::size_t>(m.size()), field);
        return m;
    }
    BasisSpec basis()
    {
        const auto family = u8("basis family");
        const auto S = static_cast<int>(u32("basis S"));
        const auto J = static_cast<int>(u32("basis J"));
        const auto d = static_cast<int>(u32("basis d"));
        const auto depth = static_cast<int>(u32("basis cascade depth"));
        if (family > 1)
            throw FormatError(where() + "unknown basis family " + std::to_string(family));
        if (J > 30 || d < 1 || d > kMaxDim || static_cast<long long>(J) * d > 30)
            throw FormatError(where() + "implausible basis J=" + std::to_string(J) + " d=" + std::to_string(d));
        try {
            return build_basis(static_cast<Family>(family), J, d, S, depth);
        } catch (const ConfigError& e) {
            throw FormatError(where() + e.what());
        }
    }
    void finish()
    {
        if (pos_ != bytes_.size())
            throw FormatError(std::string(artifact_name(kind_)) + ": " + std::to_string(bytes_.size() - pos_) +
                              " trailing bytes after offset " + std::to_string(pos_));
    }
    std::string where() const { return std::string(artifact_name(kind_)) + " at byte " + std::to_string(pos_) + ": "; }

private:
    void need(std::size_t n, const char* field)
    {
        if (bytes_.size() - pos_ < n)
            throw FormatError(std::string(artifact_name(kind_)) + " truncated at byte offset " +
                              std::to_string(bytes_.size()) + ": field '" + field + "' at offset " +
                              std::to_string(pos_) + " needs " + std::to_string(n) + " bytes");
    }

    const std::vector<std::uint8_t>& bytes_;
    ArtifactKind kind_;
    std::size_t pos_ = 0;
};

void check_hash(std::uint64_t stored, std::uint64_t computed, const char* what)
{
    if (stored != computed) {
        std::ostringstream os;
        os << what << ": content hash mismatch (header " << std::hex << stored << ", payload " << computed << ")";
        throw FormatError(os.str());
    }
}

std::string hex(std::uint64_t v)
{
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << v;
    return os.str();
}

std::string num(double v)
{
    std::ostringstream os;
    os << std::setprecision(12) << v;
    return os.str();
}

} // namespace

const char* artifact_magic(ArtifactKind kind)
{
    switch (kind) {
    case ArtifactKind::Path: return "DLPT";
    case ArtifactKind::Stats: return "DLSS";
    case ArtifactKind::Posterior: return "DLPS";
    case ArtifactKind::Coefficients: return "DLCF";
    case ArtifactKind::Fourier: return "DLFF";
    }
    return "????";
}

const char* artifact_name(ArtifactKind kind)
{
    switch (kind) {
    case ArtifactKind::Path: return "path";
    case ArtifactKind::Stats: return "stats";
    case ArtifactKind::Posterior: return "posterior";
    case ArtifactKind::Coefficients: return "coefficients";
    case ArtifactKind::Fourier: return "fourier";
    }
    return "unknown";
}

ArtifactKind peek_artifact(const std::string& file)
{
    const auto bytes = read_file(file);
    if (bytes.size() < 4)
        throw FormatError(file + ": truncated at byte offset " + std::to_string(bytes.size()) +
                          ": field 'magic' needs 4 bytes");
    for (auto k : {ArtifactKind::Path, ArtifactKind::Stats, ArtifactKind::Posterior, ArtifactKind::Coefficients,
                   ArtifactKind::Fourier})
        if (std::memcmp(bytes.data(), artifact_magic(k), 4) == 0)
            return k;
    throw FormatError(file + ": bad magic, not a driftlab artifact");
}

// ---------------------------------------------------------------------------

std::vector<std::uint8_t> encode(const DiffusionPath& path)
{
    Writer w(ArtifactKind::Path);
    w.u32(static_cast<std::uint32_t>(path.dim()));
    w.f64(path.delta());
    w.u64(path.n_steps());
    w.u64(path.seed());
    for (int k = 0; k < path.dim(); ++k)
        w.f64(path.x0()[k]);
    w.u64(path.hash());
    w.f64s(path.positions().data(), path.positions().size());
    return w.take();
}

DiffusionPath decode_path(const std::vector<std::uint8_t>& bytes)
{
    Reader r(bytes, ArtifactKind::Path);
    const auto d = static_cast<int>(r.u32("d"));
    if (d < 1 || d > kMaxDim)
        throw FormatError(r.where() + "dimension " + std::to_string(d) + " out of range");
    const double delta = r.f64("delta");
    const std::uint64_t n = r.u64("n_steps");
    const std::uint64_t seed = r.u64("seed");
    Point x0{0, 0, 0};
    for (int k = 0; k < d; ++k)
        x0[k] = r.f64("x0");
    const std::uint64_t stored = r.u64("path_hash");
    if (n >= (std::uint64_t{1} << 40))
        throw FormatError(r.where() + "implausible step count");
    std::vector<double> pos(static_cast<std::size_t>((n + 1) * static_cast<std::uint64_t>(d)));
    r.f64s(pos.data(), pos.size(), "positions");
    r.finish();
    DiffusionPath path(d, delta, static_cast<std::size_t>(n), seed, x0, std::move(pos));
    check_hash(stored, path.hash(), "path");
    return path;
}

std::vector<std::uint8_t> encode(const SufficientStatistics& s)
{
    Writer w(ArtifactKind::Stats);
    w.basis(s.spec);
    w.f64(s.T);
    w.f64(s.delta);
    w.u64(s.path_hash);
    w.u64(s.hash());
    w.matrix(s.gram);
    w.matrix(s.m);
    return w.take();
}

SufficientStatistics decode_stats(const std::vector<std::uint8_t>& bytes)
{
    Reader r(bytes, ArtifactKind::Stats);
    SufficientStatistics s;
    s.spec = r.basis();
    s.T = r.f64("T");
    s.delta = r.f64("delta");
    s.path_hash = r.u64("path_hash");
    const std::uint64_t stored = r.u64("stats_hash");
    const auto v = static_cast<Eigen::Index>(s.spec.size());
    s.gram = r.matrix(v, v, "gram");
    s.m = r.matrix(v, s.spec.dim(), "m");
    r.finish();
    s.basis_hash = s.spec.hash();
    check_hash(stored, s.hash(), "stats");
    return s;
}

std::vector<std::uint8_t> encode(const GaussianPosterior& p)
{
    Writer w(ArtifactKind::Posterior);
    w.basis(p.spec());
    w.f64(p.prior().alpha);
    w.f64(p.prior().a);
    w.f64(p.horizon());
    w.u64(p.stats_hash());
    w.u64(p.hash());
    w.matrix(p.precision());
    w.matrix(p.cholesky_factor());
    w.matrix(p.mean().values());
    w.matrix(p.rhs());
    return w.take();
}

GaussianPosterior decode_posterior(const std::vector<std::uint8_t>& bytes)
{
    Reader r(bytes, ArtifactKind::Posterior);
    const BasisSpec spec = r.basis();
    PriorSpec prior;
    prior.alpha = r.f64("prior alpha");
    prior.a = r.f64("prior a");
    prior.level = spec.level();
    prior.dim = spec.dim();
    const double T = r.f64("T");
    const std::uint64_t stats_hash = r.u64("stats_hash");
    const std::uint64_t stored = r.u64("posterior_hash");
    const auto v = static_cast<Eigen::Index>(spec.size());
    Eigen::MatrixXd P = r.matrix(v, v, "precision");
    const Eigen::MatrixXd L = r.matrix(v, v, "cholesky factor");
    const Eigen::MatrixXd mean = r.matrix(v, spec.dim(), "mean");
    Eigen::MatrixXd rhs = r.matrix(v, spec.dim(), "rhs");
    r.finish();
    try {
        prior.validate();
    } catch (const ConfigError& e) {
        throw FormatError(std::string("posterior: ") + e.what());
    }
    GaussianPosterior post(spec, prior, T, std::move(P), std::move(rhs), stats_hash);
    check_hash(stored, post.hash(), "posterior");
    // the factor and mean are recomputed on load; the stored copies must agree
    if (!(post.cholesky_factor() - L).isZero(0.0) || !(post.mean().values() - mean).isZero(0.0))
        throw FormatError("posterior: stored Cholesky factor or mean does not match the precision");
    return post;
}

std::vector<std::uint8_t> encode(const CoefficientField& c)
{
    Writer w(ArtifactKind::Coefficients);
    w.basis(c.spec());
    w.u8(static_cast<std::uint8_t>(c.coords()));
    w.u32(static_cast<std::uint32_t>(c.components()));
    w.matrix(c.values());
    return w.take();
}

CoefficientField decode_coefficients(const std::vector<std::uint8_t>& bytes)
{
    Reader r(bytes, ArtifactKind::Coefficients);
    const BasisSpec spec = r.basis();
    const auto coords = r.u8("coords");
    if (coords > 1)
        throw FormatError(r.where() + "unknown coordinate flag " + std::to_string(coords));
    const auto comps = static_cast<int>(r.u32("components"));
    if (comps < 1 || comps > kMaxDim)
        throw FormatError(r.where() + "component count " + std::to_string(comps) + " out of range");
    Eigen::MatrixXd v = r.matrix(static_cast<Eigen::Index>(spec.size()), comps, "values");
    r.finish();
    return {spec, static_cast<Coords>(coords), std::move(v)};
}

std::vector<std::uint8_t> encode(const FourierField& f)
{
    Writer w(ArtifactKind::Fourier);
    w.u32(static_cast<std::uint32_t>(f.dim()));
    w.u32(static_cast<std::uint32_t>(f.K()));
    for (const cplx& c : f.coeffs()) {
        w.f64(c.real());
        w.f64(c.imag());
    }
    return w.take();
}

FourierField decode_fourier(const std::vector<std::uint8_t>& bytes)
{
    Reader r(bytes, ArtifactKind::Fourier);
    const auto d = static_cast<int>(r.u32("d"));
    const auto K = static_cast<int>(r.u32("K"));
    if (d < 1 || d > kMaxDim || K < 0 || K > 4096)
        throw FormatError(r.where() + "implausible Fourier field d=" + std::to_string(d) + " K=" + std::to_string(K));
    FourierField f(d, K);
    std::vector<double> raw(2 * f.size());
    r.f64s(raw.data(), raw.size(), "coefficients");
    r.finish();
    for (std::size_t i = 0; i < f.size(); ++i)
        f.coeffs()[i] = cplx(raw[2 * i], raw[2 * i + 1]);
    return f;
}

// ---------------------------------------------------------------------------

std::vector<std::uint8_t> read_file(const std::string& file)
{
    std::ifstream in(file, std::ios::binary);
    if (!in)
        throw IoError("cannot open " + file);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad())
        throw IoError("read failed for " + file);
    return bytes;
}

void write_file(const std::string& file, const std::vector<std::uint8_t>& bytes)
{
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    if (!out)
        throw IoError("cannot open " + file + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out)
        throw IoError("write failed for " + file);
}

namespace {

template <class F>
auto load_with(const std::string& file, F decode)
{
    const auto bytes = read_file(file);
    try {
        return decode(bytes);
    } catch (const FormatError& e) {
        throw FormatError(file + ": " + e.what());
    }
}

} // namespace

DiffusionPath load_path(const std::string& file) { return load_with(file, decode_path); }
SufficientStatistics load_stats(const std::string& file) { return load_with(file, decode_stats); }
GaussianPosterior load_posterior(const std::string& file) { return load_with(file, decode_posterior); }
CoefficientField load_coefficients(const std::string& file) { return load_with(file, decode_coefficients); }
FourierField load_fourier(const std::string& file) { return load_with(file, decode_fourier); }

std::string describe_artifacts(const std::vector<std::string>& files)
{
    std::ostringstream os;
    std::map<std::uint64_t, std::string> paths, stats;
    std::vector<std::pair<std::string, std::uint64_t>> stat_refs, post_refs;
    for (const auto& file : files) {
        switch (peek_artifact(file)) {
        case ArtifactKind::Path: {
            const auto p = load_path(file);
            os << "path d=" << p.dim() << " T=" << num(p.horizon()) << " delta=" << num(p.delta())
               << " seed=" << p.seed() << "\n";
            os << "  n_steps=" << p.n_steps() << " hash=" << hex(p.hash()) << "\n";
            paths[p.hash()] = file;
            break;
        }
        case ArtifactKind::Stats: {
            const auto s = load_stats(file);
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s.gram, Eigen::EigenvaluesOnly);
            os << "stats " << s.spec.describe() << " T=" << num(s.T) << " delta=" << num(s.delta) << "\n";
            os << "  gram eigenvalues min=" << num(es.eigenvalues().minCoeff())
               << " max=" << num(es.eigenvalues().maxCoeff()) << "\n";
            os << "  hash=" << hex(s.hash()) << " path_hash=" << hex(s.path_hash) << "\n";
            stats[s.hash()] = file;
            stat_refs.emplace_back(file, s.path_hash);
            break;
        }
        case ArtifactKind::Posterior: {
            const auto p = load_posterior(file);
            os << "posterior " << p.spec().describe() << " T=" << num(p.horizon()) << " alpha=" << num(p.prior().alpha)
               << " a=" << num(p.prior().a) << "\n";
            os << "  normal-equation residual=" << num(p.normal_equation_residual()) << "\n";
            os << "  hash=" << hex(p.hash()) << " stats_hash=" << hex(p.stats_hash()) << "\n";
            post_refs.emplace_back(file, p.stats_hash());
            break;
        }
        case ArtifactKind::Coefficients: {
            const auto c = load_coefficients(file);
            os << "coefficients " << c.spec().describe() << " components=" << c.components() << " coords="
               << (c.coords() == Coords::Multiresolution ? "multiresolution" : "scaling") << "\n";
            break;
        }
        case ArtifactKind::Fourier: {
            const auto f = load_fourier(file);
            os << "fourier d=" << f.dim() << " K=" << f.K() << " mean=" << num(f.mean())
               << " l2=" << num(f.l2_norm()) << "\n";
            os << "  hash=" << hex(f.hash()) << "\n";
            break;
        }
        }
    }
    // provenance chain among the supplied files
    if (!paths.empty())
        for (const auto& [file, ref] : stat_refs)
            if (!paths.contains(ref))
                throw FormatError(file + ": references path " + hex(ref) + " which matches no supplied path");
    if (!stats.empty())
        for (const auto& [file, ref] : post_refs)
            if (!stats.contains(ref))
                throw FormatError(file + ": references stats " + hex(ref) + " which matches no supplied stats");
    if (files.size() > 1 && (!paths.empty() || !stats.empty()))
        os << "provenance chain verified\n";
    return os.str();
}

} // namespace driftlab
