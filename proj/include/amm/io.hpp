#pragma once

#include <string>
#include <vector>

#include "amm/estimators.hpp"
#include "amm/pricing.hpp"
#include "amm/types.hpp"

namespace amm::io {

/// Distribution JSON: {"dim": int, "atoms": [[...], ...], "weights": [...]}.
void write_distribution(const AtomicDistribution& dist,
                        const std::string& path);
AtomicDistribution read_distribution(const std::string& path);
AtomicDistribution parse_distribution(const std::string& json_text);

/// Dataset CSV: header "sigma,x0,...,x{d-1}", '.' decimal separator, one
/// sample per row, doubles printed with round-trip precision.
void write_dataset(const HeteroDataset& data, const std::string& path);
HeteroDataset read_dataset(const std::string& path);

/// Samples CSV (no sigma column): header "x0,...,x{d-1}".
void write_samples(const RowMat& points, const std::string& path);

/// Pricing table CSV: header "dataset,p_clean,sigma,score"; empty sigma
/// field marks a clean-only row. Returns one table per dataset label, in
/// first-appearance order.
std::vector<PricingTable> read_pricing_tables(const std::string& path);

/// Bounds JSON: [{"dataset":..., "sigma":..., "inv_c_lower":...,
/// "inv_c_upper":...}, ...].
void write_bounds(const std::vector<std::pair<std::string, PricingBound>>& bounds,
                  const std::string& path);

/// Report JSON: {"w1_residuals": {...}, "n_d":..., "n_l":..., "subspace":
/// [[...]]} plus diagnostic extras.
void write_report(const EstimateReport& report, const std::string& path);

/// Loss trace CSV: header "iter,loss".
void write_loss_trace(const std::vector<double>& losses,
                      const std::string& path);

std::string format_double(double v);

}  // namespace amm::io
