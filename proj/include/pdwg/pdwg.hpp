#pragma once

#include "pdwg/quadrature.hpp"
#include "pdwg/mesh.hpp"
#include "pdwg/weak_ops.hpp"
#include "pdwg/problems.hpp"
#include "pdwg/assembly.hpp"
#include "pdwg/solver.hpp"
#include "pdwg/analysis.hpp"
#include "pdwg/vtk.hpp"
#include "pdwg/selftest.hpp"
#include "pdwg/study.hpp"
