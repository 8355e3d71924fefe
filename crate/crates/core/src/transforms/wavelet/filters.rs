//! Daubechies reconstruction low-pass filters, orders 1 through 8.
//!
//! Entry `i` of `DB[p-1]` is the tap at offset `l = i - p + 1`, so each filter
//! is supported on `l ∈ [-p+1, p]`.

pub const MAX_ORDER: usize = 8;

const DB1: [f64; 2] = [7.07106781186547573e-01, 7.07106781186547573e-01];
const DB2: [f64; 4] = [
    4.82962913144534156e-01,
    8.36516303737807942e-01,
    2.24143868042013389e-01,
    -1.29409522551260370e-01,
];
const DB3: [f64; 6] = [
    3.32670552950082632e-01,
    8.06891509311092547e-01,
    4.59877502118491543e-01,
    -1.35011020010254584e-01,
    -8.54412738820266582e-02,
    3.52262918857095333e-02,
];
const DB4: [f64; 8] = [
    2.30377813308896506e-01,
    7.14846570552915672e-01,
    6.30880767929858921e-01,
    -2.79837694168598543e-02,
    -1.87034811719093086e-01,
    3.08413818355607640e-02,
    3.28830116668851966e-02,
    -1.05974017850690317e-02,
];
const DB5: [f64; 10] = [
    1.60102397974192928e-01,
    6.03829269797189649e-01,
    7.24308528437772936e-01,
    1.38428145901320743e-01,
    -2.42294887066382025e-01,
    -3.22448695846383748e-02,
    7.75714938400457188e-02,
    -6.24149021279827437e-03,
    -1.25807519990819988e-02,
    3.33572528547377125e-03,
];
const DB6: [f64; 12] = [
    1.11540743350109467e-01,
    4.94623890398453059e-01,
    7.51133908021095364e-01,
    3.15250351709197629e-01,
    -2.26264693965439828e-01,
    -1.29766867567261940e-01,
    9.75016055873230425e-02,
    2.75228655303057269e-02,
    -3.15820393174860298e-02,
    5.53842201161496126e-04,
    4.77725751094551076e-03,
    -1.07730108530847959e-03,
];
const DB7: [f64; 14] = [
    7.78520540850091841e-02,
    3.96539319481917285e-01,
    7.29132090846235092e-01,
    4.69782287405193122e-01,
    -1.43906003928564979e-01,
    -2.24036184993874982e-01,
    7.13092192668302594e-02,
    8.06126091510830783e-02,
    -3.80299369350144134e-02,
    -1.65745416306668815e-02,
    1.25509985560998405e-02,
    4.29577972921366515e-04,
    -1.80164070404749085e-03,
    3.53713799974520241e-04,
];
const DB8: [f64; 16] = [
    5.44158422431040081e-02,
    3.12871590914299946e-01,
    6.75630736297289758e-01,
    5.85354683654206731e-01,
    -1.58291052563493059e-02,
    -2.84015542961546907e-01,
    4.72484573913282795e-04,
    1.28747426620478472e-01,
    -1.73693010018075474e-02,
    -4.40882539307947546e-02,
    1.39810279173982824e-02,
    8.74609404740577662e-03,
    -4.87035299345157414e-03,
    -3.91740373376947050e-04,
    6.75449406450569331e-04,
    -1.17476784124769535e-04,
];

/// Low-pass taps for `db{order}`; `None` outside `1..=8`.
pub fn lowpass(order: usize) -> Option<&'static [f64]> {
    Some(match order {
        1 => &DB1,
        2 => &DB2,
        3 => &DB3,
        4 => &DB4,
        5 => &DB5,
        6 => &DB6,
        7 => &DB7,
        8 => &DB8,
        _ => return None,
    })
}

/// High-pass taps `g_l = (-1)^l h_{1-l}` on the same offsets as the low-pass.
pub fn highpass(order: usize) -> Option<[f64; 2 * MAX_ORDER]> {
    let h = lowpass(order)?;
    let p = order as i64;
    let mut g = [0.0; 2 * MAX_ORDER];
    for (i, gi) in g.iter_mut().enumerate().take(h.len()) {
        let l = i as i64 - p + 1;
        let src = (1 - l + p - 1) as usize;
        *gi = if l.rem_euclid(2) == 0 { h[src] } else { -h[src] };
    }
    Some(g)
}
