#pragma once

// Everything except the Eigen-backed reference solver (modulus_oracle.hpp).

#include "qrgeom/certificate.hpp"
#include "qrgeom/covering.hpp"
#include "qrgeom/curves.hpp"
#include "qrgeom/dilatation.hpp"
#include "qrgeom/embedding.hpp"
#include "qrgeom/error.hpp"
#include "qrgeom/generators.hpp"
#include "qrgeom/io.hpp"
#include "qrgeom/measure.hpp"
#include "qrgeom/modulus.hpp"
#include "qrgeom/parallel.hpp"
#include "qrgeom/pullback.hpp"
#include "qrgeom/quasiregular.hpp"
#include "qrgeom/space.hpp"
#include "qrgeom/threshold.hpp"
