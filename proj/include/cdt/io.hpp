#pragma once

#include <iosfwd>
#include <span>
#include <string>

#include "cdt/coclustering.hpp"
#include "cdt/dense_matrix.hpp"
#include "cdt/mmmf.hpp"
#include "cdt/ratings.hpp"
#include "cdt/transfer.hpp"

namespace cdt {

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

// Models are stored as named CSV blocks:
//
//   # cdt mmmf-model
//   U,<rows>,<cols>
//   <rows lines of <cols> comma-separated values>
//   V,<rows>,<cols>
//   ...
//
// Blank lines and lines starting with '#' are ignored.

void write_mmmf_model(std::ostream& out, const MmmfModel& model);
MmmfModel read_mmmf_model(std::istream& in);

void write_transfer_model(std::ostream& out, const TransferModel& model);
TransferModel read_transfer_model(std::istream& in);

/// One row per codebook row, no header.
void write_codebook_csv(std::ostream& out, const Codebook& cb);

/// Like write_codebook_csv; dropped cells are written as empty fields.
void write_partial_codebook_csv(std::ostream& out, const PartialCodebook& pcb);

/// Reads either CSV form back; empty fields become dropped cells.
PartialCodebook read_partial_codebook_csv(std::istream& in);

/// `user,item,rating` rows with 1-based ids for every cell of `m`.
void write_triplets(std::ostream& out, const DenseMatrix& m);

/// `user,item,rating` rows with 1-based ids for the given cells.
void write_triplets(std::ostream& out, std::span<const Rating> cells,
                    std::span<const double> values);

}  // namespace cdt
