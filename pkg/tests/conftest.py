import pytest

from fuce.dsl import parse_design

ECHO_SRC = "design echo { inputs 1; output(in[0]); }"

# One if followed by another: decisions (b0, ?), (b1, ?).
TWO_IFS_SRC = """
design two_ifs {
  inputs 2;
  if (in[0] == 0) { output(1); }
  if (in[1] == 1) { output(2); }
  output(0);
}
"""

# Counted loop driven by the first input word.
LOOP_SRC = """
design counted_loop {
  inputs 1;
  i = 0;
  while (i < in[0]) {
    i = i + 1;
  }
  output(i);
}
"""

SPIN_SRC = """
design spin {
  inputs 1;
  while (0 == 0) {
    x = 1;
  }
}
"""


@pytest.fixture
def echo():
    return parse_design(ECHO_SRC)


@pytest.fixture
def two_ifs():
    return parse_design(TWO_IFS_SRC)


@pytest.fixture
def counted_loop():
    return parse_design(LOOP_SRC)


@pytest.fixture
def spin():
    return parse_design(SPIN_SRC)
