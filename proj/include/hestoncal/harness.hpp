#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "hestoncal/calibrator.hpp"
#include "hestoncal/forward_solver.hpp"
#include "hestoncal/grid.hpp"
#include "hestoncal/types.hpp"

namespace hestoncal {

/// Raised for malformed or inconsistent experiment configuration.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class StudyKind : std::uint8_t { kSingle, kMesh, kMaturity, kRandom };

std::string to_string(StudyKind kind);
StudyKind study_kind_from_string(std::string_view name);

struct MeshSize {
  std::size_t n_x = 80;
  std::size_t n_nu = 80;
  std::size_t n_tau = 40;

  friend bool operator==(const MeshSize&, const MeshSize&) = default;
};

/// Mesh pairs (N_x, N_x / 2) and (N_x, N_x) for N_x = 80, 90, ..., 140 with
/// N_tau = N_x / 2.
std::vector<MeshSize> default_mesh_list();

struct ExperimentSpec {
  StudyKind kind = StudyKind::kSingle;
  MarketSpec market;
  HestonParams reference;
  HestonParams initial{0.92, 0.05, 5.2, 0.18};
  MeshSize mesh;
  TruncationConfig truncation;
  std::vector<MeshSize> meshes = default_mesh_list();
  std::vector<double> maturities{0.25, 0.5, 1.0, 2.0, 5.0};
  std::vector<double> deltas{0.05, 0.25};
  std::size_t samples = 100;
  std::uint64_t seed = 20240607;
  CalibConfig calib;
  std::filesystem::path output_dir = "results";
  std::size_t workers = 0;  // 0: one per hardware thread
  bool record_timing = false;
  double spot = 10.0;
  double nu0 = 0.16;

  /// Throws ConfigError.
  void validate() const;
};

/// Parses a JSON config. Keys absent from the document keep the values of
/// `base`; unknown keys are rejected. Throws ConfigError.
ExperimentSpec spec_from_json(std::string_view text, const ExperimentSpec& base = {});
ExperimentSpec load_spec(const std::filesystem::path& path, const ExperimentSpec& base = {});
/// Full snapshot of a spec, readable by spec_from_json.
std::string spec_to_json(const ExperimentSpec& spec);

/// V_d for the given reference parameters on exactly the calibration grid.
Trajectory generate_data(const HestonParams& reference, const MarketSpec& market, const Grid& grid,
                         double theta = 2.0 / 3.0);

struct RunRecord {
  std::string study;
  std::size_t run_id = 0;
  std::uint64_t seed = 0;
  double delta = 0.0;
  MeshSize mesh;
  double maturity = 0.0;
  HestonParams u0;  // after projection
  HestonParams u_opt;
  double j0 = 0.0;
  double j_opt = 0.0;
  double improvement = 0.0;
  std::size_t iterations = 0;
  std::string status;  // a CalibStatus name, or "error"
  std::string error;
  double wall_ms = 0.0;
  bool start_projected = false;
  std::vector<StepRecord> steps;
  std::vector<double> grad_norms;

  [[nodiscard]] bool failed() const { return status == "error"; }
  /// (p0 - p_opt) / p0 per parameter.
  [[nodiscard]] ParamVector parameter_change() const;
};

struct StudyReport {
  StudyKind kind = StudyKind::kSingle;
  ExperimentSpec spec;
  std::vector<RunRecord> runs;  // ordered by run_id
  std::size_t reprojected_draws = 0;

  [[nodiscard]] bool any_failed() const;
};

/// Initial guesses of the random study: for every delta in order, `samples`
/// draws uniform in u_ref [1 - delta, 1 + delta] per component, taken from
/// one sequential mt19937_64 stream and projected. Returns (delta, u0, moved).
struct InitialDraw {
  double delta = 0.0;
  HestonParams u0;
  bool reprojected = false;
};
std::vector<InitialDraw> draw_initial_guesses(const ExperimentSpec& spec);

StudyReport run_single(const ExperimentSpec& spec);
StudyReport run_mesh_study(const ExperimentSpec& spec);
StudyReport run_maturity_study(const ExperimentSpec& spec);
StudyReport run_random_init_study(const ExperimentSpec& spec);
StudyReport run_study(const ExperimentSpec& spec);

inline constexpr std::string_view kReportHeader =
    "study,run_id,seed,delta,N_x,N_nu,N_tau,T,sigma0,rho0,kappa0,mu0,sigma_opt,rho_opt,kappa_opt,mu_opt,J0,Jopt,"
    "improvement,iters,status,wall_ms";

/// The run table as CSV text (header plus one line per run).
std::string report_csv(const StudyReport& report);

/// Writes <study>_runs.csv, <study>_config.json and the plot-data tables of
/// the study into dir. Returns the written paths. Filesystem errors propagate.
std::vector<std::filesystem::path> emit_report(const StudyReport& report, const std::filesystem::path& dir);

}  // namespace hestoncal
