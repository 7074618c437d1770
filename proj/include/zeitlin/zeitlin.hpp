#pragma once

#include "zeitlin/basis.hpp"
#include "zeitlin/diagnostics.hpp"
#include "zeitlin/driver.hpp"
#include "zeitlin/integrator.hpp"
#include "zeitlin/io.hpp"
#include "zeitlin/laplacian.hpp"
#include "zeitlin/matrix.hpp"
#include "zeitlin/wigner.hpp"
