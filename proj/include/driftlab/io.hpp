#pragma once

// Binary artifacts. Every file starts with a 4-byte magic and a u32 version;
// integers and IEEE-754 doubles are stored little-endian, matrices column-major.
//
//   DLPT path       d, delta, n_steps, seed, x0[d], path_hash, positions (n+1) x d (row-major)
//   DLSS stats      basis, T, delta, path_hash, stats_hash, gram v x v, m v x d
//   DLPS posterior  basis, prior, T, stats_hash, post_hash, P, lower Cholesky factor, mean, W m
//   DLCF field      basis, coords flag, components, values v x components
//   DLFF Fourier    d, K, (2K+1)^d complex coefficients as (re, im)
//
// where "basis" is family (u8), S, J, d, cascade depth (u32 each) and "prior" is
// alpha, a (f64). Readers recompute the stored content hash and reject files
// whose payload does not match it.

#include "driftlab/basis.hpp"
#include "driftlab/fourier.hpp"
#include "driftlab/likelihood.hpp"
#include "driftlab/posterior.hpp"
#include "driftlab/sde.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace driftlab {

enum class ArtifactKind { Path, Stats, Posterior, Coefficients, Fourier };

inline constexpr std::uint32_t kFormatVersion = 1;

const char* artifact_magic(ArtifactKind kind);
const char* artifact_name(ArtifactKind kind);

/// Kind from the first four bytes; FormatError on unknown magic or a short file.
ArtifactKind peek_artifact(const std::string& file);

std::vector<std::uint8_t> encode(const DiffusionPath& path);
std::vector<std::uint8_t> encode(const SufficientStatistics& stats);
std::vector<std::uint8_t> encode(const GaussianPosterior& post);
std::vector<std::uint8_t> encode(const CoefficientField& field);
std::vector<std::uint8_t> encode(const FourierField& field);

DiffusionPath decode_path(const std::vector<std::uint8_t>& bytes);
SufficientStatistics decode_stats(const std::vector<std::uint8_t>& bytes);
GaussianPosterior decode_posterior(const std::vector<std::uint8_t>& bytes);
CoefficientField decode_coefficients(const std::vector<std::uint8_t>& bytes);
FourierField decode_fourier(const std::vector<std::uint8_t>& bytes);

/// Whole-file I/O; IoError when the file cannot be opened or written.
std::vector<std::uint8_t> read_file(const std::string& file);
void write_file(const std::string& file, const std::vector<std::uint8_t>& bytes);

template <class T>
void save(const std::string& file, const T& value)
{
    write_file(file, encode(value));
}

DiffusionPath load_path(const std::string& file);
SufficientStatistics load_stats(const std::string& file);
GaussianPosterior load_posterior(const std::string& file);
CoefficientField load_coefficients(const std::string& file);
FourierField load_fourier(const std::string& file);

/// One line per file ("path d=1 T=500 delta=0.001 seed=7", ...) followed by
/// hash lines; when several artifacts are given the provenance chain
/// (stats -> path, posterior -> stats) is verified and a FormatError raised if
/// a referenced hash does not match any supplied input.
std::string describe_artifacts(const std::vector<std::string>& files);

} // namespace driftlab
