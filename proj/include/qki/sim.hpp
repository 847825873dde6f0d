#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qki/ki.hpp"
#include "qki/operators.hpp"

namespace qki {

// n-copy helpers work with product eigenvectors of single-copy spectra, so
// the enumeration size is dim^n; callers are rejected once n*log2(dim)
// exceeds this.
inline constexpr double kDenseCapBits = 14.0;

// One product eigenvector of rho^{x n}: word[k] picks the single-copy
// eigenvector used at copy k, weight is the eigenvalue product.
struct EigenWord {
    double weight = 0.0;
    std::vector<Index> word;
};

// Typical subspace of rho^{x n}: the span of product eigenvectors whose
// weight p satisfies |-(1/n) log2 p - S(rho)| <= delta. Zero eigenvalues
// (below 1e-12) never qualify. The dense projector is materialized on
// demand; everything else works from the retained word list.
struct TypicalSubspace {
    Index dim = 0;  // single copy
    Index n = 0;
    la::VectorXd evals;  // single-copy spectrum, descending
    MatrixXcd basis;     // single-copy eigenvectors, columns match evals
    std::vector<EigenWord> retained;
    double mass = 0.0;  // Tr[Pi rho^{x n}]

    Index rank() const { return static_cast<Index>(retained.size()); }
    MatrixXcd projector() const;  // dim^n x dim^n; throws DimTooLarge above 4096
};

TypicalSubspace typical_projector(const MultipartiteState& rho, Index n, double delta);

enum class CodeMode { unassisted, assisted };

// Block code as a pair of CPTP maps. Encoder input labels (and decoder
// output labels) are the source labels suffixed with the copy number,
// e.g. {C1,Q1,N1,...,Cn,Qn,Nn}; the message system is labeled M.
struct CodeInstance {
    Index n = 0;
    CodeMode mode = CodeMode::unassisted;
    double log_m = 0.0;  // qubits sent, log2 |M|
    double log_k = 0.0;  // ebits consumed
    QuantumChannel encoder;
    QuantumChannel decoder;
};

// Compression onto the top ceil(2^{n rate_q}) product eigenvectors of
// rho^{x n} (eigenvalue descending, ties broken by word order), mass
// outside the code subspace routed to the top retained vector. Dense
// channels; requires dim^n <= 256.
CodeInstance schumacher_code(const MultipartiteState& rho, Index n, double rate_q);

// Closed-form end-to-end summary of schumacher_code: the input and output
// of decoder(encoder(.)) are simultaneously diagonal in the product
// eigenbasis, so fidelity and retained mass follow from the spectrum
// alone. Subject only to the n*log2(dim) <= 14 cap.
struct SchumacherSummary {
    double fidelity = 0.0;
    double mass = 0.0;
    Index dim_m = 0;
};
SchumacherSummary schumacher_fidelity(const MultipartiteState& rho, Index n, double rate_q);

// The pinch-and-append map on {C,Q}: rho -> sum_j (|j><j| x 1) rho
// (|j><j| x 1) x omega_j, output on {C,Q,N}.
QuantumChannel reconstruct_n_channel(const KIDecomposition& ki);

// Reversal of the decomposition isometry as a channel on {C,Q,N} -> {A}:
// U' . U plus routing of mass outside the image of U to the maximally
// mixed state on the support of the A-marginal.
QuantumChannel reversal_channel(const KIDecomposition& ki);

// Full-pipeline block code on the decomposed source: encoder traces out
// N^n and Schumacher-compresses the padded (CQ)^n register at rate_q;
// decoder embeds M back and reconstructs N^n with the pinch-and-append
// map. Dense channels for auditing; small caps apply.
CodeInstance protocol_code(const KIDecomposition& ki, Index n, double rate_q);

struct SimulationReport {
    Index n = 0;
    double rate_q = 0.0;  // log_m / n
    double rate_e = 0.0;
    double fidelity = 0.0;  // F(rho^{x n}, decoded) on A^n R^n
    double typical_mass = 0.0;
    std::vector<LabeledDim> dims_used;
};

// Unassisted protocol at qubit rate rate_q: strip N^n, Schumacher at
// rate_q on (CQ)^n, regenerate N^n, undo the isometry. Fidelity is exact:
// all pipeline states are block diagonal over classical sequences and the
// regenerated N factor cancels sector by sector, leaving small per-sector
// Gram problems.
SimulationReport run_unassisted(const KIDecomposition& ki, Index n, double rate_q);
SimulationReport run_unassisted(const MultipartiteState& rho_ar, Index n, double rate_q,
                                uint64_t seed = 0);

// Assisted protocol with rate slack: the classical sequence register is
// coded on the top ceil(2^{n(S(C)+slack)}) sequences and ledgered as
// (S(C)+slack)/2 qubits plus (S(C)+slack)/2 ebits per copy via dense
// coding; the quantum part is conditional Schumacher at S(Q|C)+slack.
// Reported rates are the ledger formulas; fidelity is computed end to end
// with the classical code as a pinch-compress-restore channel.
SimulationReport run_assisted(const KIDecomposition& ki, Index n, double slack);
SimulationReport run_assisted(const MultipartiteState& rho_ar, Index n, double slack,
                              uint64_t seed = 0);

// Control: plain Schumacher on the undecomposed A at the same total rate,
// i.e. the pipeline run with the trivial single-block decomposition
// (Q = A, no C, no N). Used to quantify the advantage of stripping N.
SimulationReport run_schumacher_control(const MultipartiteState& rho_ar, Index n,
                                        double rate_q);

std::string simulation_csv(const std::vector<SimulationReport>& reports);

// One step of the converse accounting: for a bound, slack = lhs - rhs;
// for an identity, slack = -|lhs - rhs|. Both are gated at >= -1e-8.
struct AuditRow {
    std::string step;
    double lhs = 0.0;
    double rhs = 0.0;
    double slack = 0.0;
};

// Evaluates the decoding and encoding entropy accounting of the weak
// converse on the actual Stinespring dilations of `code`, applied to a
// purified n-copy source extended with classical copy registers. epsilon
// enters only through the per-copy continuity allowance
// delta = sqrt(2 eps) log2(|C||Q|) + h(sqrt(2 eps))/n  (sqrt clamped to 1).
// Requires n <= 3 and the dilated global state below the dense cap.
std::vector<AuditRow> audit_converse_chain(const CodeInstance& code,
                                           const KIDecomposition& ki, double epsilon);

// F(rho^{x n}, (decoder o encoder x id_R)(rho^{x n})) evaluated densely
// through the code's channels and the decomposition isometry; the audit's
// epsilon is 1 minus this. Same caps as protocol_code.
double code_fidelity(const CodeInstance& code, const KIDecomposition& ki);

double audit_delta(Index n, double epsilon, Index dim_cq);
std::string audit_csv(const std::vector<AuditRow>& rows);
double min_slack(const std::vector<AuditRow>& rows);
void require_audit_slack(const std::vector<AuditRow>& rows, double tol = 1e-8);

}  // namespace qki
