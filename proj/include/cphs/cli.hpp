#pragma once

namespace cphs {
int cli_dispatch(int argc, char** argv);
}
