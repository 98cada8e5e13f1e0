#pragma once

#include "dsk/types.hpp"
#include "dsk/sequence.hpp"
#include "dsk/series.hpp"
#include "dsk/merge.hpp"
#include "dsk/sk_matrix.hpp"
#include "dsk/matrix.hpp"
#include "dsk/kernel.hpp"
#include "dsk/recovery.hpp"
#include "dsk/rkhs.hpp"
#include "dsk/structured_psd.hpp"
#include "dsk/symmetry.hpp"
#include "dsk/rational.hpp"
#include "dsk/homogeneous.hpp"
