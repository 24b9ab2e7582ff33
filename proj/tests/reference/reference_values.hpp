// Generated by make_reference.py. Do not edit.
#pragma once

#include <vector>

namespace ref {
const std::vector<double> kRefK = {1.0, 0.6065306597126334, 0.6065306597126334, 0.19691167520419406, 0.6065306597126334, 1.0, 0.36787944117144233, 0.32465246735834974, 0.6065306597126334, 0.36787944117144233, 1.0, 0.5352614285189903, 0.19691167520419406, 0.32465246735834974, 0.5352614285189903, 1.0};
const std::vector<double> kRefL = {1.0, 0.8948393168143698, 0.6411803884299546, 0.3888955639892229, 0.8948393168143698, 1.0, 0.8948393168143698, 0.6065306597126334, 0.6411803884299546, 0.8948393168143698, 1.0, 0.7574651283969664, 0.3888955639892229, 0.6065306597126334, 0.7574651283969664, 1.0};
const std::vector<double> kRefTcond = {0.11412616514439644, 0.08186875195586085, 0.016731738962936782, 0.016476326344752934, 0.04959686843564903, 0.11008708686264135, 0.07758309198727409, 0.02856054039475231, -0.01668554005757672, 0.10795372039095885, 0.12171713566541909, 0.045483894772389455, -0.014315752250851688, 0.05558372372408327, 0.059619908885092054, 0.12738442342294032};
const std::vector<double> kRefAlphaIdentity = {1.7603193388573626, -0.7781959104414372, -0.8762793641568566, 0.340958487949599, -0.7781959104414373, 1.3947709414246081, 0.12467302232837434, -0.333011479273106, -0.8762793641568566, 0.12467302232837431, 1.6930179787516761, -0.7037572623489929, 0.340958487949599, -0.3330114792731059, -0.703757262348993, 1.2887894626754173};
const std::vector<double> kRefWIdentity = {0.23336765232482393, 0.1968499541725109, 0.5680044079972787, 0.14042605204418085};
const std::vector<double> kRefScoresIdentity = {-0.6566421729792336, -0.9982437742649255, -1.00030417202098, -0.5616415224284808, -1.0186408137558596};
const std::vector<double> kRefAlphaCov = {1.3966011850129334, -0.8160402633385871, -0.39962820881279426, 0.06929893250239745, -0.8718250204469584, 1.664313470522884, -0.5610616878462749, -0.2397337742349641, -0.3615326118767948, -0.6293878362611586, 1.6410316819067765, -0.6392957997440678, 0.09300705179287028, -0.2588733937611282, -0.6547596331513147, 1.1484750029748751};
const std::vector<double> kRefWCov = {0.25354952579711526, 0.31327919397503945, 0.33402363496433496, 0.2414509388367762};
const std::vector<double> kRefScoresCov = {-0.6839053375035382, -0.9710203139003601, -0.9196396493950152, -0.5661598328252992, -0.9984038232765897};
const std::vector<double> kRefAlphaCond = {2.0131129327236796, -0.5635386301725047, -0.29132356812176086, -0.12966891557169913, -0.3744356864338852, 1.932264306794843, -0.3395994985671134, -0.2023242181376749, -0.1432032829305023, -0.5643507275998073, 2.0028080559047785, -0.348817604583326, 0.033954934659300884, -0.37285842679281733, -0.38246619536800863, 1.9196015389881664};
const std::vector<double> kRefWCond = {0.10700705095618868, 0.25797630902999213, 0.1995122529098291, 0.1443943613752094};
const std::vector<double> kRefScoresCond = {-0.04386413100802966, -0.23968288151113182, -0.21668822602444782, 0.012793912038114086, -0.2580952790278046};
const std::vector<double> kRefScoresCortes = {-0.6566421729792336, -0.9982437742649255, -1.00030417202098, -0.5616415224284808, -1.0186408137558596};
// tol 0.1: rank 3
const std::vector<double> kRefCholOrder1 = {0.0, 5.0, 3.0};
const std::vector<double> kRefCholResidual1 = {0.11112928537099387};
// tol 0.001: rank 4
const std::vector<double> kRefCholOrder3 = {0.0, 5.0, 3.0, 2.0};
const std::vector<double> kRefCholResidual3 = {0.002019951674830267};
// tol 1e-06: rank 6
const std::vector<double> kRefCholOrder6 = {0.0, 5.0, 3.0, 2.0, 4.0, 1.0};
const std::vector<double> kRefCholResidual6 = {1.1102230246251565e-16};
}  // namespace ref
