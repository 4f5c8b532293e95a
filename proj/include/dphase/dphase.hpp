#ifndef DPHASE_DPHASE_HPP
#define DPHASE_DPHASE_HPP

#include "dphase/certificate.hpp"
#include "dphase/common.hpp"
#include "dphase/embedding.hpp"
#include "dphase/field.hpp"
#include "dphase/model.hpp"
#include "dphase/nfunction.hpp"
#include "dphase/quadrature.hpp"
#include "dphase/report.hpp"
#include "dphase/sobolev.hpp"
#include "dphase/solver.hpp"
#include "dphase/validate.hpp"

#endif
