#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "akpz/evolution.hpp"
#include "akpz/grid.hpp"
#include "akpz/speed.hpp"

namespace akpz {

/// Fixed 17-significant-digit scientific notation; reruns diff byte-for-byte.
inline std::string num17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", v);
  return buf;
}

inline void write_text(const std::filesystem::path& path,
                       const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << body;
}

inline nlohmann::json field_header(const GridGeom& g, const std::string& model,
                                   const std::string& kind) {
  return nlohmann::json{{"origin", {g.origin.x, g.origin.y}},
                        {"spacing", {g.spacing.x, g.spacing.y}},
                        {"shape", {g.n1, g.n2}},
                        {"model", model},
                        {"branch", "principal"},
                        {"kind", kind}};
}

inline void write_height_field(const std::filesystem::path& stem,
                               const HeightField& h,
                               const std::string& model) {
  std::string csv = "x1,x2,value,flag\n";
  for (int i = 0; i < h.geom.n1; i++)
    for (int j = 0; j < h.geom.n2; j++) {
      Vec2 x = h.geom.coord(i, j);
      csv += num17(x.x) + "," + num17(x.y) + "," + num17(h.at(i, j)) + "," +
             std::to_string(int(h.flag(i, j))) + "\n";
    }
  write_text(stem.string() + ".csv", csv);
  write_text(stem.string() + ".json",
             field_header(h.geom, model, "height").dump(2) + "\n");
}

inline void write_complex_field(const std::filesystem::path& stem,
                                const ComplexField& zf,
                                const std::string& model) {
  std::string csv = "x1,x2,re,im,flag\n";
  for (int i = 0; i < zf.geom.n1; i++)
    for (int j = 0; j < zf.geom.n2; j++) {
      Vec2 x = zf.geom.coord(i, j);
      csv += num17(x.x) + "," + num17(x.y) + "," + num17(zf.at(i, j).real()) +
             "," + num17(zf.at(i, j).imag()) + "," +
             std::to_string(int(zf.flag(i, j))) + "\n";
    }
  write_text(stem.string() + ".csv", csv);
  auto hdr = field_header(zf.geom, model, "zfield");
  hdr["branch_consistent"] = zf.branch_consistent;
  write_text(stem.string() + ".json", hdr.dump(2) + "\n");
}

inline void write_trace(const std::filesystem::path& path,
                        const EvolutionTrace& tr) {
  std::string csv =
      "t,max_EL,max_Delta,R_probe,dDelta_probe_re,dDelta_probe_im\n";
  for (size_t k = 0; k < tr.times.size(); k++) {
    csv += num17(tr.times[k]) + "," + num17(tr.max_el[k]) + "," +
           num17(tr.max_delta[k]) + "," + num17(tr.r_probe[k]) + "," +
           num17(tr.delta_rate_probe[k].real()) + "," +
           num17(tr.delta_rate_probe[k].imag()) + "\n";
  }
  write_text(path, csv);
}

inline std::string akpz_map_csv(const std::vector<AkpzClassification>& rows) {
  std::string csv = "rho1,rho2,v,h11,h12,h22,det,label\n";
  for (const auto& r : rows) {
    csv += num17(r.rho.r1) + "," + num17(r.rho.r2) + "," + num17(r.v) + "," +
           num17(r.hessian.a11) + "," + num17(r.hessian.a12) + "," +
           num17(r.hessian.a22) + "," + num17(r.det) + "," +
           to_string(r.label) + "\n";
  }
  return csv;
}

}  // namespace akpz
