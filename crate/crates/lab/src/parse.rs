//! Text encodings of command-line values.

use horolab_core::observable::TestFunction;
use horolab_core::orbit::Weighting;
use horolab_core::GroupElement;
use num_complex::Complex64;

use crate::LabError;

fn usage(msg: impl Into<String>) -> LabError {
    LabError::Usage(msg.into())
}

fn number(text: &str, what: &str) -> Result<f64, LabError> {
    text.trim()
        .parse()
        .map_err(|_| usage(format!("{what}: cannot parse {text:?} as a number")))
}

/// `a,b,c,d` with canonical sign applied.
pub fn element(text: &str) -> Result<GroupElement, LabError> {
    Ok(text.parse::<GroupElement>()?)
}

/// `x,y` with `y > 0`.
pub fn point(text: &str) -> Result<Complex64, LabError> {
    let parts: Vec<&str> = text.split(',').collect();
    let [x, y] = parts[..] else {
        return Err(usage(format!("point must be \"x,y\", got {text:?}")));
    };
    let z = Complex64::new(number(x, "point")?, number(y, "point")?);
    if !(z.im > 0.0) || !z.re.is_finite() || !z.im.is_finite() {
        return Err(usage(format!("point must lie in the upper half plane, got {text:?}")));
    }
    Ok(z)
}

/// Splits `name:key=value,key=value` into the name and its parameters.
fn keyed(text: &str) -> Result<(&str, Vec<(&str, &str)>), LabError> {
    let (name, rest) = text.split_once(':').unwrap_or((text, ""));
    let mut params = Vec::new();
    for item in rest.split(',').filter(|s| !s.trim().is_empty()) {
        match item.split_once('=') {
            Some((k, v)) => params.push((k.trim(), v.trim())),
            None => params.push(("", item.trim())),
        }
    }
    Ok((name.trim(), params))
}

fn param<'a>(params: &[(&str, &'a str)], key: &str, spec: &str) -> Result<&'a str, LabError> {
    params
        .iter()
        .find(|(k, _)| *k == key)
        .map(|(_, v)| *v)
        .ok_or_else(|| usage(format!("{spec}: missing {key}=")))
}

/// `height:Y=2,w=0.25`, `angular` or `constant:c`.
pub fn test_function(text: &str) -> Result<TestFunction, LabError> {
    let (name, params) = keyed(text)?;
    match name {
        "height" => {
            let y = number(param(&params, "Y", text)?, "Y")?;
            let w = number(param(&params, "w", text)?, "w")?;
            Ok(TestFunction::height(y, w)?)
        }
        "angular" if params.is_empty() => Ok(TestFunction::angular()),
        "constant" => match params[..] {
            [(_, c)] => Ok(TestFunction::constant(number(c, "constant")?)),
            _ => Err(usage(format!("constant needs one value, got {text:?}"))),
        },
        _ => Err(usage(format!("unknown test function {text:?}"))),
    }
}

/// `uniform`, `nu`, `prime` or `progression:q=3,j=1`.
pub fn weighting(text: &str) -> Result<Weighting, LabError> {
    let (name, params) = keyed(text)?;
    let int = |key: &str| -> Result<u64, LabError> {
        let v = param(&params, key, text)?;
        v.parse().map_err(|_| usage(format!("{key} must be a natural number, got {v:?}")))
    };
    match name {
        "uniform" => Ok(Weighting::Uniform),
        "nu" => Ok(Weighting::Nu),
        "prime" => Ok(Weighting::Prime),
        "progression" => Ok(Weighting::Progression { q: int("q")?, j: int("j")? }),
        _ => Err(usage(format!("unknown weight {text:?}"))),
    }
}
