from hypothesis import strategies as st

from docross.model import ModelParams

positive = st.floats(0.2, 3.0, allow_nan=False, allow_infinity=False)


@st.composite
def params(draw, symmetric=False):
    w12 = draw(positive)
    w23 = w12 if symmetric else draw(positive)
    return ModelParams(w12, w23, draw(positive), draw(positive))
