#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "ssmcmc/models.hpp"

namespace ssmcmc {

/// Contents of a time,x,y data file. For "sv" the real vectors are filled,
/// for "hmm" the state and symbol vectors (states 0-based in memory).
struct DataSet {
  std::string model;
  RealPath x_real;
  RealPath y_real;
  StatePath x_state;
  SymbolSeq y_symbol;

  [[nodiscard]] std::size_t size() const {
    return model == "sv" ? y_real.size() : y_symbol.size();
  }
};

/// Writes "# model=sv" then time,x,y rows (time 1-based).
void write_sv_csv(std::ostream& os, const RealPath& x, const RealPath& y,
                  const std::vector<std::string>& header_comments = {});
/// Writes "# model=hmm" then time,x,y rows with 1-based states and A/C/G/T symbols.
void write_hmm_csv(std::ostream& os, const StatePath& x, const SymbolSeq& y,
                   const std::vector<std::string>& header_comments = {});

DataSet read_data_csv(std::istream& is);
DataSet read_data_file(const std::string& path);

}  // namespace ssmcmc
