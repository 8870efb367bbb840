#pragma once

#include "quadrica/pipeline.hpp"

#include <json.hpp>

#include <string>

namespace quadrica {

// All integers as decimal strings (no 64-bit truncation); rationals as
// "numerator/denominator" (plain decimal string when the denominator is 1).
std::string rat_to_string(const Rat& r);
Rat rat_from_string(const std::string& s);

ojson to_ojson(const Int& n);
ojson to_ojson(const DiagonalForm& q);
ojson to_ojson(const QMatrix& m);
ojson to_ojson(const QVector& v);
ojson to_ojson(const Word& w);
ojson to_ojson(const Place& v);
ojson to_ojson(const EquivalenceReport& r);
ojson to_ojson(const IsotropyReport& r);
ojson to_ojson(const MontesinosReport& r);
ojson to_ojson(const ReplacementResult& r);
ojson to_ojson(const SubformSelection& r);
ojson to_ojson(const SubformChain& r);
ojson to_ojson(const CuspData& c);
ojson to_ojson(const GroupConfig& cfg);
ojson to_ojson(const Presentation& p);
ojson to_ojson(const ChainAssignment& a);
ojson to_ojson(const DensityReport& r);
ojson to_ojson(const SweepReport& r);
ojson to_ojson(const PipelineOptions& o);
ojson to_ojson(const Certificate& c);
ojson to_ojson(const BrokenGeodesic& bg, int real_digits = 30);

DiagonalForm form_from_json(const ojson& j);
DiagonalForm form_from_coeff_list(const std::string& comma_separated);
QMatrix matrix_from_json(const ojson& j);
QVector qvector_from_json(const ojson& j);
Word word_from_json(const ojson& j);
GroupConfig config_from_json(const ojson& j);

ojson load_json_file(const std::string& path);
void save_json_file(const std::string& path, const ojson& j);

} // namespace quadrica
