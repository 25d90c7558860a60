// Extract a discrete normal eps-harmonic field on the one-hole toroid and
// write it to VTK. Usage: pdwg_demo [n] [out.vtk]

#include "pdwg/pdwg.hpp"

#include "blas_env.hpp"

#include <iostream>
#include <string>

int main(int argc, char** argv) {
  pdwg_tools::pin_blas_core(argv);
  const int n = argc > 1 ? std::stoi(argv[1]) : 4;
  const std::string out = argc > 2 ? argv[2] : "harmonic_torus.vtk";

  pdwg::ProblemParams p;
  p.beta = 1.0;
  const pdwg::ProblemSpec spec = pdwg::make_problem(7, p);
  const pdwg::DomainSpec dom = pdwg::build_domain(7);
  const pdwg::Mesh mesh = pdwg::build_structured_tet_mesh(dom, n);

  const pdwg::HarmonicField eta = pdwg::extract_discrete_harmonic(spec, dom, mesh, {}, 4);
  std::cout << mesh.num_tets() << " tets, ||eps^1/2 eta_h|| = " << eta.norm << "\n";

  pdwg::VtkCellData data;
  data.vectors = {{"eta_h", &eta.eta}};
  pdwg::write_vtk(out, mesh, data, "discrete harmonic field");
  std::cout << "wrote " << out << "\n";
}
