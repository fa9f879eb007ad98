#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gsindy/linalg.hpp"
#include "gsindy/timeseries.hpp"

namespace gsindy {

/// Model variables, in the fixed library order B, C, G, b.
enum class Variable : std::uint8_t {
  bolus = 0,    ///< B: absorbed, shifted bolus insulin
  carbs = 1,    ///< C: absorbed, shifted carbohydrates
  glucose = 2,  ///< G: blood glucose (the state)
  basal = 3,    ///< b: basal insulin
};
inline constexpr std::size_t kNumVariables = 4;
inline constexpr std::array<Variable, kNumVariables> kVariables{
    Variable::bolus, Variable::carbs, Variable::glucose, Variable::basal};

/// "B", "C", "G" or "b".
const char* symbol(Variable v);
std::optional<Variable> variable_from_symbol(std::string_view s);

/// Variable values indexed by `Variable`.
using State = std::array<double, kNumVariables>;

inline State make_state(double glucose, double carbs, double bolus, double basal) {
  return {bolus, carbs, glucose, basal};
}

enum class TrigFunction : std::uint8_t { none, sin, cos };

/// One candidate right-hand-side term: a monomial in (B, C, G, b), or sin/cos
/// of a single variable when `trig` is set (exponents are then all zero).
struct TermDescriptor {
  std::array<int, kNumVariables> exponents{};
  TrigFunction trig = TrigFunction::none;
  Variable trig_variable = Variable::glucose;

  static TermDescriptor constant() { return {}; }
  static TermDescriptor monomial(std::initializer_list<std::pair<Variable, int>> powers);

  int degree() const;
  bool is_constant() const { return trig == TrigFunction::none && degree() == 0; }
  int exponent(Variable v) const { return exponents[static_cast<std::size_t>(v)]; }
  /// "1", "G", "G²", "B·b", "sin(G)".
  std::string name() const;
  double evaluate(const State& x) const;

  bool operator==(const TermDescriptor&) const = default;
};

/// Candidate terms: the constant, then monomials by increasing degree, each
/// degree in lexicographic order over B < C < G < b; sin/cos per variable last.
std::vector<TermDescriptor> library_terms(int max_degree, bool trig = false);

struct LibraryOptions {
  int max_degree = 2;
  bool trig = false;
};

/// Candidate terms evaluated at every sample.
struct LibraryMatrix {
  std::vector<TermDescriptor> terms;
  Matrix values;  // rows: samples, columns: terms
  /// Normalisation divisor per column: 1 for the constant (a column of ones
  /// already has unit RMS), the population standard deviation otherwise.
  std::vector<double> scale;
  /// Columns that are identically zero or constant (other than the constant
  /// term itself); never entered into the regression.
  std::vector<bool> degenerate;

  std::size_t rows() const { return values.rows(); }
  std::size_t cols() const { return values.cols(); }
};

/// Library over aligned channel samples.
LibraryMatrix build_library(std::span<const double> glucose, std::span<const double> carbs,
                            std::span<const double> bolus, std::span<const double> basal,
                            const LibraryOptions& options = {});

/// Library for a preprocessed day with `shifts` applied to the absorbed inputs.
LibraryMatrix build_library(const DaySegment& day, const ShiftConfig& shifts,
                            const LibraryOptions& options = {});

struct SindyHyper {
  double threshold = 0.1;  ///< lambda, in normalised-column units
  double ridge = 1e-6;     ///< alpha
  int max_iter = 20;
  int max_degree = 2;
  bool trig = false;
  bool normalize = true;

  bool operator==(const SindyHyper&) const = default;
};

struct Provenance {
  std::optional<Date> train_day;
  std::optional<ShiftConfig> shifts;
  bool operator==(const Provenance&) const = default;
};

/// dG/dt = sum_j coefficients[j] * terms[j](G, C, B, b). Only retained terms are
/// stored; coefficients are in original units.
struct SparseModel {
  std::vector<TermDescriptor> terms;
  std::vector<double> coefficients;
  SindyHyper hyper;
  Provenance provenance;

  std::size_t size() const { return terms.size(); }
  /// Coefficient of `term`, or 0 if it was not retained.
  double coefficient(const TermDescriptor& term) const;
  /// Human-readable right-hand side.
  std::string to_string() const;

  bool operator==(const SparseModel&) const = default;
};

struct StlsqResult {
  SparseModel model;
  /// One entry per library column, zeros for eliminated terms.
  std::vector<double> coefficients;
  /// Same, in the normalised space where thresholding happens.
  std::vector<double> scaled_coefficients;
  /// Active mask at the start of every iteration.
  std::vector<std::vector<bool>> active_history;
  int iterations = 0;
  bool converged = false;
  std::vector<std::string> warnings;
};

/// Sequential thresholded least squares: ridge solve on the active columns,
/// drop every |scaled coefficient| < threshold, repeat until the active set is
/// stable. Throws EmptyModelError if every column is dropped.
StlsqResult stlsq(const LibraryMatrix& library, std::span<const double> target,
                  const SindyHyper& hyper = {});

/// Shifts, differentiates glucose, builds the library and runs stlsq.
/// Errors are rethrown with the day and shifts in the message.
SparseModel fit_day(const DaySegment& day, const ShiftConfig& shifts, const SindyHyper& hyper = {},
                    const TimeUnit& unit = {}, std::vector<std::string>* warnings = nullptr);

// --- JSON --------------------------------------------------------------------

/// {"variables", "terms": [{"name", "exponents", "coefficient"}], "hyper", "provenance"}
std::string model_to_json(const SparseModel& model);
/// Throws ParseError.
SparseModel model_from_json(std::string_view text);

}  // namespace gsindy
