#pragma once

#include "qgle/error.hpp"
#include "qgle/numerics.hpp"
#include "qgle/kernel_spectrum.hpp"
#include "qgle/relaxation.hpp"
#include "qgle/variances.hpp"
#include "qgle/fpe_diffusion.hpp"
#include "qgle/potential.hpp"
#include "qgle/langevin_mc.hpp"
#include "qgle/smoluchowski.hpp"
#include "qgle/cli_io.hpp"
#include "qgle/acceptance.hpp"
