#pragma once

#include "quadrica/hypgeom.hpp"

#include <json.hpp>

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace quadrica {

using ojson = nlohmann::ordered_json;

struct ChainAssignmentEntry {
    int i = 0;           // stable letter index
    int requested_k = 0; // the case-table level
    int used_k = 0;      // after clamping to the available chain
    bool clamped = false;
    std::string label;   // "p(k,i)"
};

struct ChainAssignment {
    int n = 0; // ambient hyperbolic dimension
    int N = 0; // cusp count, N > n-3
    std::vector<ChainAssignmentEntry> table;
    bool any_clamped = false;
};

// t_i -> p_{(i+2,i)} for 0 <= i <= n-3, t_i -> p_{(2,i)} for i >= n-2; the
// i = n-3 entry exceeds the available chain (k <= n-2) and is clamped with a
// flag. n = 4 degenerates to all t_i -> p_{(2,i)} unflagged.
ChainAssignment assign_stable_letters(int n, int N,
                                      const std::vector<std::map<int, QMatrix>>& cusp_chains);

struct DensityReport {
    std::vector<QVector> invariant_vectors; // q-positive common (+/-)-eigenvectors
    bool contains_corner_block = false;
    int generator_count = 0;
    long patterns_examined = 0;
    long patterns_pruned = 0;
    bool degenerate = false; // all generators trivial
};

// Exact eigenspace intersections over all sign patterns with incremental
// pruning; an empty vector list certifies the no-invariant-hyperplane
// hypothesis for the generated group. Enforces <= 20 generators.
DensityReport hyperplane_invariance_check(const std::vector<QMatrix>& gens, const DiagonalForm& q,
                                          const std::vector<int>& corner_indices = {});

struct SweepReport {
    SweepBounds bounds;
    double D = 6.0;
    long precision_bits = 256;
    Rat level;                 // uniform horoball level
    std::vector<Int> powers;   // chosen power per cusp
    std::vector<std::string> power_displacements;
    long words = 0;
    std::map<int, long> by_ell;
    long certificates = 0;
    std::vector<std::string> failures; // must stay empty
    std::string min_angle_margin;      // decimal strings; empty when no certificates
    std::string min_length_margin;
    long runtime_ms = -1; // -1 when not measured (deterministic reports)
};

// Enumerates all reduced words within bounds over the power-adjusted config;
// exact nontriviality for every nonempty word, broken-geodesic certificates
// for l >= 2. Any identity-criterion disagreement aborts.
SweepReport faithfulness_sweep(const GroupConfig& cfg, const SweepBounds& bounds, double D,
                               long precision_bits, bool timing = false);

// Shipped verifier configs: 1, 2 (= T1) or 3 cusps over <-1,1,1,1,1>.
GroupConfig make_toy_config(int num_cusps = 2);

struct PipelineOptions {
    double D = 6.0;
    long precision_bits = 256;
    SweepBounds sweep;
    Int witness_bound = 1000;
    long scan_cap = 10000000;
    LegendreCondition legendre = LegendreCondition::MinusAOverP;
    bool timing = false;
    bool run_sweep = true;
};

// End-to-end: parametric form -> subform -> generators -> presentation ->
// assignment -> horoballs/powers -> sweep -> density report, as one
// deterministic JSON document.
ojson run_pipeline_from_params(const Int& S, const Int& a, const PipelineOptions& opts);
ojson run_pipeline_from_form(const DiagonalForm& q, const PipelineOptions& opts);
ojson run_pipeline_toy(const std::string& name, int num_cusps, const PipelineOptions& opts);

// Config assembled from a parametric (S, a) pair: two cusps on the isotropic
// subform, Eichler cusp generators, one stable-letter parabolic per cusp.
GroupConfig build_config_from_params(const Int& S, const Int& a, const PipelineOptions& opts);

} // namespace quadrica
